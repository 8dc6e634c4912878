"""Primitive vocabulary and bit-accurate semantics.

Every evaluator works on *lane masks*: a Python ``int`` whose bit ``i`` is the
value of the signal in independent simulation lane ``i``.  ``m`` is the
all-ones mask for the active lanes, so scalar use is simply ``m=1``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cache
from importlib import resources

__all__ = [
    "PrimitiveKind", "LutSpec", "FlipFlopState", "CellError",
    "catalog", "get_kind", "is_primitive", "is_unsupported_block",
    "eval_gate", "eval_lut", "eval_ff", "ff_next_state",
]


class CellError(ValueError):
    pass


@dataclass(frozen=True)
class PrimitiveKind:
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    clocked: bool
    params: tuple[str, ...] = ()

    @property
    def pins(self) -> tuple[str, ...]:
        return self.inputs + self.outputs

    @property
    def lut_size(self) -> int | None:
        if self.name.startswith("LUT"):
            return int(self.name[3:])
        return None

    @property
    def output(self) -> str:
        return self.outputs[0]


@dataclass(frozen=True)
class LutSpec:
    k: int
    init_mask: int

    def __post_init__(self):
        if not 1 <= self.k <= 6:
            raise CellError(f"LUT size must be 1..6, got {self.k}")
        if not 0 <= self.init_mask < (1 << (1 << self.k)):
            raise CellError(f"INIT mask {self.init_mask:#x} does not fit LUT{self.k}")


@dataclass(frozen=True)
class FlipFlopState:
    """Double-buffered flip-flop storage: ``gv1`` pending, ``gv2`` current."""
    gv1: int = 0
    gv2: int = 0
    prev_clk: int = 0


@cache
def catalog() -> dict[str, PrimitiveKind]:
    text = resources.files(__package__).joinpath("catalog.json").read_text()
    kinds = {}
    for rec in json.loads(text)["primitives"]:
        kinds[rec["name"]] = PrimitiveKind(
            name=rec["name"],
            inputs=tuple(rec["inputs"]),
            outputs=tuple(rec["outputs"]),
            clocked=rec["class"] == "clocked",
            params=tuple(rec["params"]),
        )
    for kind in kinds.values():
        if kind.clocked:
            assert "C" in kind.inputs and kind.outputs == ("Q",), kind.name
    return kinds


def get_kind(name: str) -> PrimitiveKind:
    try:
        return catalog()[name]
    except KeyError:
        raise CellError(f"unknown primitive kind {name!r}") from None


def is_primitive(name: str) -> bool:
    return name in catalog()


_BLOCK_RE = re.compile(r"^(DSP|RAM|ROM|FIFO)", re.IGNORECASE)


def is_unsupported_block(name: str) -> bool:
    """DSP and memory blocks are recognised only to be rejected."""
    return bool(_BLOCK_RE.match(name))


_GATES = {
    "AND2": lambda v, m: v[0] & v[1],
    "AND3": lambda v, m: v[0] & v[1] & v[2],
    "AND4": lambda v, m: v[0] & v[1] & v[2] & v[3],
    "OR2": lambda v, m: v[0] | v[1],
    "OR3": lambda v, m: v[0] | v[1] | v[2],
    "OR4": lambda v, m: v[0] | v[1] | v[2] | v[3],
    "XOR2": lambda v, m: v[0] ^ v[1],
    "XNOR2": lambda v, m: (v[0] ^ v[1]) ^ m,
    "NAND2": lambda v, m: (v[0] & v[1]) ^ m,
    "NOR2": lambda v, m: (v[0] | v[1]) ^ m,
    "INV": lambda v, m: v[0] ^ m,
    "BUF": lambda v, m: v[0],
    "CONST0": lambda v, m: 0,
    "CONST1": lambda v, m: m,
}


def eval_gate(kind: PrimitiveKind | str, inputs, m: int = 1) -> int:
    if isinstance(kind, str):
        kind = get_kind(kind)
    fn = _GATES.get(kind.name)
    if fn is None:
        raise CellError(f"{kind.name} is not a plain gate")
    if len(inputs) != len(kind.inputs):
        raise CellError(f"{kind.name} takes {len(kind.inputs)} inputs, got {len(inputs)}")
    return fn(inputs, m)


def eval_lut(spec: LutSpec, inputs, m: int = 1) -> int:
    """Look up the INIT mask at address ``sum(inputs[i] << i)``.

    Input ``I0`` is the least significant address bit.  Lanes are resolved by
    Shannon expansion on the most significant input, so each lane reads its
    own mask bit.
    """
    if len(inputs) != spec.k:
        raise CellError(f"LUT{spec.k} takes {spec.k} inputs, got {len(inputs)}")

    def select(level: int, lo: int) -> int:
        # mask bits lo .. lo + 2**level - 1 addressed by inputs[0:level]
        if level == 0:
            return m if (spec.init_mask >> lo) & 1 else 0
        sel = inputs[level - 1]
        f0 = select(level - 1, lo)
        f1 = select(level - 1, lo + (1 << (level - 1)))
        return (sel & f1) | ((sel ^ m) & f0)

    return select(spec.k, 0)


def ff_next_state(kind: PrimitiveKind | str, cur: int, d: int, ctrl: dict, m: int = 1) -> int:
    """Stored value after a rising edge, ignoring asynchronous clear."""
    name = kind if isinstance(kind, str) else kind.name
    nxt = d
    if name in ("FDR", "FDRE"):
        nxt = d & (_pin(ctrl, "R", name) ^ m)
    if name in ("FDRE", "FDCE"):
        ce = _pin(ctrl, "CE", name)
        nxt = (ce & nxt) | ((ce ^ m) & cur)
    return nxt


def _pin(ctrl: dict, pin: str, kind: str) -> int:
    try:
        return ctrl[pin]
    except KeyError:
        raise CellError(f"{kind} requires control pin {pin}") from None


def eval_ff(kind: PrimitiveKind | str, state: FlipFlopState, clk: int, d: int,
            ctrl: dict | None = None, m: int = 1) -> tuple[int, FlipFlopState]:
    """One call of a double-buffered flip-flop.

    Returns ``(q, state')``.  ``q`` is the current value read *before* the
    pending buffer is copied over, so a call made during a rising edge still
    reports the pre-edge value.
    """
    if isinstance(kind, str):
        kind = get_kind(kind)
    if not kind.clocked:
        raise CellError(f"{kind.name} is not a flip-flop")
    ctrl = ctrl or {}
    posedge = (state.prev_clk ^ clk) & clk
    gv1 = state.gv1
    gv2 = state.gv2
    nxt = ff_next_state(kind, gv2, d, ctrl, m)
    gv1 = (posedge & nxt) | ((posedge ^ m) & gv1)
    if "CLR" in kind.inputs:
        keep = _pin(ctrl, "CLR", kind.name) ^ m
        gv1 &= keep
        gv2 &= keep
    q = gv2
    return q, FlipFlopState(gv1=gv1, gv2=gv1, prev_clk=clk)
