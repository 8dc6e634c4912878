"""Two simulators over the same lane-parallel value representation.

:class:`CompiledSim` executes the final schedule as straight-line code, one
block per slot.  :class:`EventSim` is an event-driven reference used only to
check it: it ignores the schedule entirely and propagates value changes to a
fixpoint.

A value is a lane mask: bit ``i`` holds the signal in lane ``i``.  One
evaluation pass evaluates every lane with inputs held constant; a clock cycle
is a ``clk=1`` pass followed by a ``clk=0`` pass.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import cells
from .compiler import Compiled
from .netlist import CONST0, CONST1, FlatDesign
from .schedule import SlotMode

__all__ = ["SimState", "CompiledSim", "EventSim", "ConvergenceError", "python_source"]


class ConvergenceError(RuntimeError):
    pass


@dataclass
class SimState:
    """Flip-flop storage as a flat ``[gv1, gv2, prev_clk] * n`` list."""
    ff: list[int]
    ff_names: list[str]
    passes: int = 0

    def flip_flop(self, name: str) -> cells.FlipFlopState:
        i = self.ff_names.index(name)
        return cells.FlipFlopState(*self.ff[3 * i:3 * i + 3])


def _gate_expr(kind: str, a: list[str]) -> str:
    match kind:
        case "AND2" | "AND3" | "AND4":
            return " & ".join(a)
        case "OR2" | "OR3" | "OR4":
            return " | ".join(a)
        case "XOR2":
            return f"{a[0]} ^ {a[1]}"
        case "XNOR2":
            return f"{a[0]} ^ {a[1]} ^ M"
        case "NAND2":
            return f"({a[0]} & {a[1]}) ^ M"
        case "NOR2":
            return f"({a[0]} | {a[1]}) ^ M"
        case "INV":
            return f"{a[0]} ^ M"
        case "BUF":
            return a[0]
        case "CONST0":
            return "0"
        case "CONST1":
            return "M"
    raise ValueError(kind)


def _lut_expr(k: int, mask: int, a: list[str]) -> str:
    """Shannon expansion on the highest input with constant folding.

    Evaluates the same function as the sum of products the backends emit,
    but shares structure, which matters for wide LUTs in Python.
    """
    memo: dict[tuple[int, int], str] = {}

    def rec(n: int, m: int) -> str:
        full = (1 << (1 << n)) - 1
        if m == 0:
            return "0"
        if m == full:
            return "M"
        key = (n, m)
        if key in memo:
            return memo[key]
        half = 1 << (n - 1)
        lo, hi = m & ((1 << half) - 1), m >> half
        x = a[n - 1]
        if lo == hi:
            e = rec(n - 1, lo)
        else:
            f0, f1 = rec(n - 1, lo), rec(n - 1, hi)
            if f0 == "0":
                e = x if f1 == "M" else f"({x} & {f1})"
            elif f1 == "0":
                e = f"({x} ^ M)" if f0 == "M" else f"(({x} ^ M) & {f0})"
            elif f1 == "M":
                e = f"({x} | {f0})"
            elif f0 == "M":
                e = f"(({x} ^ M) | {f1})"
            else:
                e = f"(({x} & ({f1} ^ {f0})) ^ {f0})"
        memo[key] = e
        return e

    return rec(k, mask)


def python_source(compiled: Compiled, fn_name: str = "evaluate") -> tuple[str, list[str]]:
    """Lower the final schedule to a Python function ``fn(I, S, M)``.

    ``I`` holds one lane mask per top-level input bit, ``S`` the flip-flop
    state list and ``M`` the all-lanes mask.  Returns the source and the
    flip-flop names in state order.
    """
    design = compiled.design
    ff_index: dict[int, int] = {}
    ff_names = []
    for ci, cell in enumerate(design.cells):
        if cell.clocked:
            ff_index[ci] = len(ff_names)
            ff_names.append(cell.name)

    lines = [f"def {fn_name}(I, S, M):", "    s0 = 0", "    s1 = M"]
    k = 0
    for port in design.inputs:
        for s in port.bits:
            lines.append(f"    s{s} = I[{k}]")
            k += 1

    def sig(s: int) -> str:
        return f"s{s}"

    for slot in compiled.schedule.slots:
        cell = design.cells[slot.cell]
        lines.append(f"    # {slot.name} ({cell.kind.name}, {slot.mode.value})")
        if not cell.clocked:
            args = [sig(cell.pins[p]) for p in cell.kind.inputs]
            if cell.kind.lut_size:
                expr = _lut_expr(cell.kind.lut_size, cell.params["INIT"], args)
            else:
                expr = _gate_expr(cell.kind.name, args)
            lines.append(f"    {sig(cell.out_signal)} = {expr}")
            continue
        b = 3 * ff_index[slot.cell]
        pins = cell.pins
        has_clr = "CLR" in cell.kind.inputs
        if slot.mode is SlotMode.COPY:
            # clock held at its remembered level: no edge, state only cleared
            if has_clr:
                lines.append(f"    _k = {sig(pins['CLR'])} ^ M")
                lines.append(f"    S[{b}] &= _k")
                lines.append(f"    S[{b + 1}] = S[{b}]")
            lines.append(f"    {sig(cell.out_signal)} = S[{b + 1}]")
            continue
        nxt = sig(pins["D"])
        if "R" in pins:
            nxt = f"({nxt} & ({sig(pins['R'])} ^ M))"
        if "CE" in pins:
            ce = sig(pins["CE"])
            nxt = f"(({ce} & {nxt}) | (({ce} ^ M) & S[{b + 1}]))"
        clk = sig(pins["C"])
        lines.append(f"    _e = (S[{b + 2}] ^ {clk}) & {clk}")
        lines.append(f"    _g = (_e & {nxt}) | ((_e ^ M) & S[{b}])")
        lines.append(f"    _q = S[{b + 1}]")
        if has_clr:
            lines.append(f"    _k = {sig(pins['CLR'])} ^ M")
            lines.append("    _g &= _k")
            lines.append("    _q &= _k")
        lines.append(f"    S[{b}] = _g")
        lines.append(f"    S[{b + 1}] = _g")
        lines.append(f"    S[{b + 2}] = {clk}")
        if slot.mode is SlotMode.NORMAL:
            lines.append(f"    {sig(cell.out_signal)} = _q")
    outs = [sig(s) for port in design.outputs for s in port.bits]
    lines.append(f"    return [{', '.join(outs)}]")
    return "\n".join(lines) + "\n", ff_names


class _Base:
    design: FlatDesign

    def __init__(self, design: FlatDesign, lanes: int):
        if lanes < 1:
            raise ValueError("lanes must be >= 1")
        self.design = design
        self.lanes = lanes
        self.mask = (1 << lanes) - 1
        self.in_bits = [s for p in design.inputs for s in p.bits]

    def step(self, in_bits: list[int]) -> list[int]:
        raise NotImplementedError

    def eval_pass(self, inputs: dict[str, int]) -> dict[str, int]:
        """Scalar convenience wrapper: port values in, port values out (lane 0)."""
        bits = []
        for port in self.design.inputs:
            value = inputs[port.name]
            if value >> port.width:
                raise ValueError(f"value {value} does not fit input {port.name} ({port.width} bits)")
            bits.extend(self.mask if (value >> i) & 1 else 0 for i in range(port.width))
        out_bits = self.step(bits)
        result = {}
        k = 0
        for port in self.design.outputs:
            v = 0
            for i in range(port.width):
                v |= (out_bits[k] & 1) << i
                k += 1
            result[port.name] = v
        return result


class CompiledSim(_Base):
    """Executes the final schedule lowered to a Python function."""

    def __init__(self, compiled: Compiled, lanes: int = 1):
        super().__init__(compiled.design, lanes)
        self.compiled = compiled
        self.source, ff_names = python_source(compiled)
        namespace: dict = {}
        exec(compile(self.source, f"<compiled {compiled.name}>", "exec"), namespace)
        self._fn = namespace["evaluate"]
        self.state = SimState([0] * (3 * len(ff_names)), ff_names)

    def reset(self):
        self.state = SimState([0] * len(self.state.ff), self.state.ff_names)

    def step(self, in_bits: list[int]) -> list[int]:
        out = self._fn(in_bits, self.state.ff, self.mask)
        self.state.passes += 1
        return out


class EventSim(_Base):
    """Event-driven reference simulator.

    Each pass applies the inputs, then propagates changes in delta waves until
    no net changes.  Flip-flops present their stored value during the pass and
    sample their inputs once the pass has settled, so every reader sees
    pre-edge state.
    """

    def __init__(self, design: FlatDesign, lanes: int = 1):
        super().__init__(design, lanes)
        n = design.num_signals
        self.fanout: list[list[int]] = [[] for _ in range(n)]
        for ci, cell in enumerate(design.cells):
            for _, s in cell.input_signals():
                if ci not in self.fanout[s]:
                    self.fanout[s].append(ci)
        self.ffs = [ci for ci, c in enumerate(design.cells) if c.clocked]
        self.out_bits = [s for p in design.outputs for s in p.bits]
        self.reset()

    def reset(self):
        self.values = [0] * self.design.num_signals
        self.values[CONST1] = self.mask
        self.stored = {ci: 0 for ci in self.ffs}
        self.prev_clk = {ci: 0 for ci in self.ffs}
        self.passes = 0
        self._dirty: set[int] = set(range(len(self.design.cells)))

    def _eval(self, cell: cells.PrimitiveKind, ci: int) -> int:
        c = self.design.cells[ci]
        v = self.values
        m = self.mask
        if c.clocked:
            q = self.stored[ci]
            if "CLR" in c.kind.inputs:
                q &= v[c.pins["CLR"]] ^ m
            return q
        args = [v[c.pins[p]] for p in c.kind.inputs]
        lut = c.lut
        if lut is not None:
            return cells.eval_lut(lut, args, m)
        return cells.eval_gate(c.kind, args, m)

    def step(self, in_bits: list[int]) -> list[int]:
        v = self.values
        dirty = self._dirty
        for s, val in zip(self.in_bits, in_bits):
            if v[s] != val:
                v[s] = val
                dirty.update(self.fanout[s])
        cells_ = self.design.cells
        limit = len(cells_) + 1
        waves = 0
        while dirty:
            waves += 1
            if waves > limit:
                names = sorted(cells_[ci].name for ci in dirty)
                raise ConvergenceError(f"no fixpoint after {limit} delta cycles; active: {', '.join(names[:8])}")
            wave = sorted(dirty)
            dirty = set()
            for ci in wave:
                cell = cells_[ci]
                out = self._eval(cell.kind, ci)
                o = cell.out_signal
                if v[o] != out:
                    v[o] = out
                    dirty.update(self.fanout[o])
        outputs = [v[s] for s in self.out_bits]

        m = self.mask
        for ci in self.ffs:
            c = cells_[ci]
            clk = v[c.pins["C"]]
            posedge = (self.prev_clk[ci] ^ m) & clk
            cur = self.stored[ci]
            ctrl = {p: v[c.pins[p]] for p in ("R", "CE") if p in c.pins}
            nxt = cells.ff_next_state(c.kind, cur, v[c.pins["D"]], ctrl, m)
            new = (posedge & nxt) | ((posedge ^ m) & cur)
            if "CLR" in c.pins:
                new &= v[c.pins["CLR"]] ^ m
            self.prev_clk[ci] = clk
            if new != cur:
                self.stored[ci] = new
                dirty.add(ci)
        self._dirty = dirty
        self.passes += 1
        return outputs
