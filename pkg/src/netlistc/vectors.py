"""Stimulus files, transcripts, and the lane-parallel vector runner.

A vector file is CSV: input port columns, then ``expect_<port>`` columns
(blank = don't care), one row per evaluation pass.  An optional leading
``case`` column splits the rows into independent runs, each starting from
reset; runs of equal length are simulated together, one per lane.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .netlist import FlatDesign

__all__ = [
    "VectorError", "VectorSet", "Transcript", "Divergence",
    "read_vectors", "write_vectors", "run_vectors", "diff_transcripts", "sample_indices",
    "pack_lanes", "unpack_lanes",
]

MAX_LANES = 1 << 14


class VectorError(ValueError):
    pass


def _parse_value(text: str, where: str) -> int:
    t = text.strip()
    try:
        v = int(t[2:], 16) if t.lower().startswith("0x") else int(t, 10)
    except ValueError:
        raise VectorError(f"{where}: not a decimal or 0x-hex value: {text!r}") from None
    if v < 0 or v >= 1 << 64:
        raise VectorError(f"{where}: value {t} out of range")
    return v


@dataclass
class VectorSet:
    inputs: list[str]
    outputs: list[str]              # ports with an expect_ column
    stimulus: np.ndarray            # (rows, len(inputs)) uint64
    expected: np.ndarray            # (rows, len(outputs)) uint64
    care: np.ndarray                # (rows, len(outputs)) bool
    case: np.ndarray | None = None  # (rows,) int64; a case's rows are contiguous

    def __post_init__(self):
        if len(self.stimulus) == 0:
            raise VectorError("vector set is empty: at least one row required")

    def __len__(self):
        return len(self.stimulus)

    @classmethod
    def build(cls, inputs: list[str], outputs: list[str], stimulus, expected=None, care=None, case=None):
        stim = np.asarray(stimulus, dtype=np.uint64).reshape(-1, len(inputs))
        rows = len(stim)
        if expected is None:
            expected = np.zeros((rows, len(outputs)), dtype=np.uint64)
            care = np.zeros((rows, len(outputs)), dtype=bool)
        exp = np.asarray(expected, dtype=np.uint64).reshape(rows, len(outputs))
        if care is None:
            care = np.ones(exp.shape, dtype=bool)
        care = np.asarray(care, dtype=bool).reshape(exp.shape)
        cs = None if case is None else np.asarray(case, dtype=np.int64)
        return cls(list(inputs), list(outputs), stim, exp, care, cs)

    def cases(self) -> list[tuple[int, int]]:
        """(start, length) of each independent run."""
        if self.case is None:
            return [(0, len(self))]
        bounds = np.flatnonzero(np.diff(self.case)) + 1
        starts = np.concatenate([[0], bounds])
        ends = np.concatenate([bounds, [len(self)]])
        return list(zip(starts.tolist(), (ends - starts).tolist()))

    def check(self, design: FlatDesign):
        """Ports must match the design exactly and values fit their widths."""
        ports = {p.name: p for p in design.ports}
        for name in self.inputs:
            if name not in ports:
                raise VectorError(f"vector column {name!r} names no port of {design.name}")
            if ports[name].direction != "input":
                raise VectorError(f"vector column {name!r} is an output; use expect_{name}")
        for name in self.outputs:
            if name not in ports or ports[name].direction != "output":
                raise VectorError(f"column expect_{name} names no output port of {design.name}")
        missing = [p.name for p in design.inputs if p.name not in self.inputs]
        if missing:
            raise VectorError(f"no stimulus for input port(s): {', '.join(missing)}")
        for j, name in enumerate(self.inputs):
            w = ports[name].width
            if w > 64:
                raise VectorError(f"port {name!r} is {w} bits wide; vectors support at most 64")
            if w < 64:
                over = np.flatnonzero(self.stimulus[:, j] >> np.uint64(w))
                if len(over):
                    r = int(over[0])
                    raise VectorError(
                        f"row {r}: value {int(self.stimulus[r, j])} does not fit {w}-bit port {name!r}")


def read_vectors(source: str | Path | io.TextIOBase) -> VectorSet:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as f:
            return read_vectors(f)
    name = getattr(source, "name", "<vectors>")
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise VectorError(f"{name}: empty file") from None
    has_case = bool(header) and header[0] == "case"
    cols = header[1:] if has_case else header
    inputs = [h for h in cols if not h.startswith("expect_")]
    outputs = [h[len("expect_"):] for h in cols if h.startswith("expect_")]
    if any(not h.startswith("expect_") for h in cols[len(inputs):]):
        raise VectorError(f"{name}: input columns must come before expect_ columns")
    if len(set(cols)) != len(cols):
        raise VectorError(f"{name}: duplicate column")
    stim, exp, care, case = [], [], [], []
    n_in = len(inputs)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise VectorError(f"{name}:{lineno}: expected {len(header)} fields, got {len(row)}")
        where = f"{name}:{lineno}"
        if has_case:
            case.append(_parse_value(row[0], where))
            row = row[1:]
        stim.append([_parse_value(v, where) for v in row[:n_in]])
        e = row[n_in:]
        exp.append([_parse_value(v, where) if v.strip() else 0 for v in e])
        care.append([bool(v.strip()) for v in e])
    if not stim:
        raise VectorError(f"{name}: vector set is empty: at least one row required")
    return VectorSet.build(inputs, outputs, stim, exp, care, case if has_case else None)


def write_vectors(vs: VectorSet, dest: str | Path | io.TextIOBase):
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as f:
            return write_vectors(vs, f)
    w = csv.writer(dest, lineterminator="\n")
    head = (["case"] if vs.case is not None else []) + vs.inputs + [f"expect_{o}" for o in vs.outputs]
    w.writerow(head)
    for r in range(len(vs)):
        row = [str(int(vs.case[r]))] if vs.case is not None else []
        row += [str(int(v)) for v in vs.stimulus[r]]
        row += [str(int(v)) if c else "" for v, c in zip(vs.expected[r], vs.care[r])]
        w.writerow(row)


def pack_lanes(values: np.ndarray, width: int) -> list[int]:
    """Per-lane port values -> one lane mask per bit (LSB first)."""
    n = len(values)
    bits = ((values[:, None] >> np.arange(width, dtype=np.uint64)) & np.uint64(1)).astype(np.uint8)
    packed = np.packbits(bits, axis=0, bitorder="little")
    return [int.from_bytes(packed[:, i].tobytes(), "little") for i in range(width)] if n else [0] * width


def unpack_lanes(masks: list[int], lanes: int) -> np.ndarray:
    """Inverse of :func:`pack_lanes`: bit masks -> per-lane values."""
    nbytes = (lanes + 7) // 8
    out = np.zeros(lanes, dtype=np.uint64)
    for i, m in enumerate(masks):
        if not m:
            continue
        bits = np.unpackbits(np.frombuffer(m.to_bytes(nbytes, "little"), dtype=np.uint8),
                             bitorder="little")[:lanes]
        out |= bits.astype(np.uint64) << np.uint64(i)
    return out


@dataclass
class Transcript:
    outputs: list[str]
    values: np.ndarray                  # (rows, len(outputs)) uint64
    case: np.ndarray | None = None
    row_ok: np.ndarray | None = None    # per row; None without expectations
    checked: np.ndarray | None = None   # rows carrying at least one expectation

    @property
    def has_verdicts(self) -> bool:
        return self.row_ok is not None and bool(self.checked.any())

    def _units(self) -> tuple[int, int]:
        if not self.has_verdicts:
            return 0, 0
        if self.case is None:
            ok = self.row_ok[self.checked]
            return int(ok.sum()), int((~ok).sum())
        _, inv = np.unique(self.case, return_inverse=True)
        n = inv.max() + 1
        bad = np.zeros(n, dtype=bool)
        np.logical_or.at(bad, inv, self.checked & ~self.row_ok)
        has = np.zeros(n, dtype=bool)
        np.logical_or.at(has, inv, self.checked)
        return int((has & ~bad).sum()), int((has & bad).sum())

    @property
    def passed(self) -> int:
        return self._units()[0]

    @property
    def failed(self) -> int:
        return self._units()[1]

    def summary(self) -> str:
        p, f = self._units()
        return f"RESULT pass={p} fail={f}"

    def verdict(self) -> str:
        p, f = self._units()
        return f"{p}/{p + f} pass"

    def write_csv(self, dest: io.TextIOBase):
        w = csv.writer(dest, lineterminator="\n")
        head = ["pass"] + (["case"] if self.case is not None else []) + self.outputs
        if self.row_ok is not None:
            head.append("verdict")
        w.writerow(head)
        for r in range(len(self.values)):
            row = [str(r)] + ([str(int(self.case[r]))] if self.case is not None else [])
            row += [str(int(v)) for v in self.values[r]]
            if self.row_ok is not None:
                row.append("" if not self.checked[r] else ("pass" if self.row_ok[r] else "FAIL"))
            w.writerow(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _apply_expectations(t: Transcript, vs: VectorSet) -> Transcript:
    if not vs.outputs or not vs.care.any():
        return t
    cols = [t.outputs.index(o) for o in vs.outputs]
    got = t.values[:, cols]
    mism = (got != vs.expected) & vs.care
    t.row_ok = ~mism.any(axis=1)
    t.checked = vs.care.any(axis=1)
    return t


def run_vectors(factory, design: FlatDesign, vs: VectorSet, max_lanes: int = MAX_LANES) -> Transcript:
    """Drive ``vs`` through simulators made by ``factory(lanes)``.

    Each case starts from reset in its own lane; up to ``max_lanes`` cases
    share one simulator instance.
    """
    vs.check(design)
    in_ports = [design.port(n) for n in vs.inputs]
    order = [vs.inputs.index(p.name) for p in design.inputs]
    outs = design.outputs
    values = np.zeros((len(vs), len(outs)), dtype=np.uint64)

    # longest cases first; a lane whose case has ended repeats its last row
    # and its outputs are discarded, which cannot affect the other lanes
    spans = sorted(vs.cases(), key=lambda sl: -sl[1])
    for lo in range(0, len(spans), max_lanes):
        chunk = spans[lo:lo + max_lanes]
        starts = np.array([s for s, _ in chunk], dtype=np.int64)
        lens = np.array([n for _, n in chunk], dtype=np.int64)
        lanes = len(chunk)
        sim = factory(lanes)
        for r in range(int(lens[0])):
            live = lens > r
            rows = starts + np.minimum(r, lens - 1)
            stim = vs.stimulus[rows]
            bits: list[int] = []
            for j in order:
                bits.extend(pack_lanes(stim[:, j], in_ports[j].width))
            out_bits = sim.step(bits)
            k = 0
            keep = rows[live]
            for pi, port in enumerate(outs):
                values[keep, pi] = unpack_lanes(out_bits[k:k + port.width], lanes)[live]
                k += port.width
    t = Transcript([p.name for p in outs], values, vs.case)
    return _apply_expectations(t, vs)


@dataclass
class Divergence:
    row: int
    port: str
    left: int
    right: int
    case: int | None = None

    def __str__(self):
        where = f"pass {self.row}" + (f" (case {self.case})" if self.case is not None else "")
        return f"first divergence at {where}, port {self.port}: {self.left} != {self.right}"


def diff_transcripts(a: Transcript, b: Transcript) -> Divergence | None:
    if a.outputs != b.outputs or a.values.shape != b.values.shape:
        raise ValueError("transcripts have different shapes")
    bad = np.argwhere(a.values != b.values)
    if not len(bad):
        return None
    r, c = (int(x) for x in bad[0])
    case = None if a.case is None else int(a.case[r])
    return Divergence(r, a.outputs[c], int(a.values[r, c]), int(b.values[r, c]), case)


def sample_indices(space: int, n: int, seed: int) -> np.ndarray:
    """``n`` case indices drawn uniformly from ``range(space)``.

    Draws are distinct when the space is small enough to enumerate
    (at most 2**24) and ``n`` fits in it; otherwise they are independent
    draws with replacement.
    """
    rng = np.random.default_rng(seed)
    if n <= space <= 1 << 24:
        return np.sort(rng.choice(space, size=n, replace=False)).astype(np.uint64)
    return rng.integers(0, space, size=n, dtype=np.uint64)
