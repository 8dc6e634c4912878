"""Bundled benchmark designs, their reference models, and vector generators.

Expected values come from plain integer arithmetic on the case parameters,
never from the netlists.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from math import gcd as _gcd
from typing import Callable

import numpy as np

from ..compiler import Compiled, compile_source
from ..vectors import VectorSet, read_vectors, sample_indices
from .designs import GCD_WIDTH

__all__ = ["Benchmark", "BENCHMARKS", "get", "names", "bundled_vectors"]

DEFAULT_SAMPLES = 10_000


@dataclass
class Benchmark:
    name: str
    top: str
    category: str                   # "combinational" or "clocked"
    fields: list[tuple[str, int]]   # independent case parameters (name, bits)
    table_count: int                # case count of the full-scale run
    exhaustive: bool                # default run covers the whole space
    make: Callable[[dict[str, np.ndarray]], VectorSet]

    @property
    def netlist(self) -> str:
        return f"{self.name}.v"

    @property
    def vectors_file(self) -> str:
        return f"{self.name}.csv"

    @property
    def space(self) -> int:
        return 1 << sum(w for _, w in self.fields)

    def source(self) -> str:
        return resources.files(__package__).joinpath(self.netlist).read_text(encoding="utf-8")

    def path(self):
        return resources.files(__package__).joinpath(self.netlist)

    def compile(self) -> Compiled:
        return compile_source(self.source(), self.top, self.netlist)

    def bundled_vectors(self) -> VectorSet:
        with resources.files(__package__).joinpath(self.vectors_file).open("r", encoding="utf-8") as f:
            return read_vectors(f)

    def default_count(self) -> int:
        return self.space if self.exhaustive else DEFAULT_SAMPLES

    def cases(self, n: int | None = None, seed: int = 0, full: bool = False) -> dict[str, np.ndarray]:
        """Case parameters: exhaustive when the run covers the whole space,
        else ``n`` uniform samples (reproducible per seed)."""
        if full:
            n = self.table_count
        elif n is None:
            n = self.default_count()
        if n == self.space and self.space <= 1 << 24:
            idx = np.arange(self.space, dtype=np.uint64)
        elif self.space <= 1 << 63:
            idx = sample_indices(self.space, n, seed)
        else:
            rng = np.random.default_rng(seed)
            return {f: rng.integers(0, 1 << w, size=n, dtype=np.uint64) for f, w in self.fields}
        out = {}
        shift = 0
        for f, w in self.fields:
            out[f] = (idx >> np.uint64(shift)) & np.uint64((1 << w) - 1)
            shift += w
        return out

    def vectors(self, n: int | None = None, seed: int = 0, full: bool = False) -> VectorSet:
        return self.make(self.cases(n, seed, full))


def _u(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint64)


def _comb(inputs: list[str], outputs: list[str]):
    """One pass per case; every case is independent."""
    def wrap(model):
        def make(c: dict[str, np.ndarray]) -> VectorSet:
            stim, exp = model(c)
            n = len(stim[0])
            return VectorSet.build(inputs, outputs, np.column_stack(stim), np.column_stack(exp),
                                   case=np.arange(n))
        return make
    return wrap


@_comb(["a", "b", "cin"], ["sum", "cout"])
def _adder(c):
    total = c["a"] + c["b"] + c["cin"]
    return [c["a"], c["b"], c["cin"]], [total & _u(0xFFFF), total >> _u(16)]


def _parity4(v):
    v = v ^ (v >> _u(2))
    return (v ^ (v >> _u(1))) & _u(1)


@_comb(["a", "b", "cin"], ["s", "cout"])
def _bcdadder(c):
    a, b = c["a"], c["b"]
    cin = _parity4(a ^ b)       # 256 cases cover (a, b); cin varies with them
    z = a + b + cin
    cout = (z > 9).astype(np.uint64)
    return [a, b, cin], [(z + _u(6) * cout) & _u(15), cout]


@_comb(["n", "d"], ["q"])
def _divide(c):
    n, d = c["n"], c["d"]
    q = np.where(d == 0, _u(0xFF), n // np.maximum(d, _u(1)))
    return [n, d], [q]


@_comb(["x"], ["r"])
def _mod3(c):
    return [c["x"]], [c["x"] % _u(3)]


@_comb(["x"], ["count"])
def _popcount(c):
    x = c["x"]
    count = sum((x >> _u(i)) & _u(1) for i in range(8))
    return [x], [count]


def _addertree(c) -> VectorSet:
    """Inputs held for three clock cycles; the sum appears after the third
    rising edge, on the final low-clock pass."""
    n = len(c["a"])
    rows = 6
    clk = np.tile([1, 0], 3).astype(np.uint64)
    stim = np.zeros((n, rows, 7), dtype=np.uint64)
    stim[:, :, 0] = clk
    for j, f in enumerate("abcde"):
        stim[:, :, 2 + j] = c[f][:, None]
    total = sum(c[f] for f in "abcde") & _u(0xFFFF)
    exp = np.zeros((n, rows, 1), dtype=np.uint64)
    care = np.zeros((n, rows, 1), dtype=bool)
    exp[:, -1, 0] = total
    care[:, -1, 0] = True
    return VectorSet.build(["clk", "rst", "a", "b", "c", "d", "e"], ["out"],
                           stim.reshape(-1, 7), exp.reshape(-1, 1), care.reshape(-1, 1),
                           np.repeat(np.arange(n), rows))


def gcd_steps(a: int, b: int) -> int:
    """Subtraction steps until the operands are equal or one is zero."""
    steps = 0
    while a != b and a and b:
        if a > b:
            a -= b
        else:
            b -= a
        steps += 1
    return steps


def _gcd_cases(c) -> VectorSet:
    """One load cycle with ``start`` high, then enough cycles to finish plus
    one more; result and done are checked on the last pass."""
    a_all = c["a"].tolist()
    b_all = c["b"].tolist()
    lengths = [2 * (gcd_steps(a, b) + 2) for a, b in zip(a_all, b_all)]
    total = sum(lengths)
    stim = np.zeros((total, 4), dtype=np.uint64)
    exp = np.zeros((total, 2), dtype=np.uint64)
    care = np.zeros((total, 2), dtype=bool)
    case = np.repeat(np.arange(len(lengths)), lengths)
    r = 0
    for a, b, ln in zip(a_all, b_all, lengths):
        stim[r:r + ln, 0] = np.tile([1, 0], ln // 2)
        stim[r:r + 2, 1] = 1
        stim[r:r + ln, 2] = a
        stim[r:r + ln, 3] = b
        exp[r + ln - 1] = (_gcd(a, b), 1)
        care[r + ln - 1] = True
        r += ln
    return VectorSet.build(["clk", "start", "a", "b"], ["result", "done"], stim, exp, care, case)


ANDREG_SEQUENCE = [(0, 1, 1), (1, 1, 1), (0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1), (0, 1, 0), (1, 1, 0)]


def andreg_expected(rows) -> list[int]:
    """Registered AND: a rising edge captures a&b, visible from the next pass."""
    q, prev, out = 0, 0, []
    for clk, a, b in rows:
        out.append(q)
        if clk and not prev:
            q = a & b
        prev = clk
    return out


def _andreg(c) -> VectorSet:
    rows = ANDREG_SEQUENCE
    return VectorSet.build(["clk", "a", "b"], ["out"], rows, [[v] for v in andreg_expected(rows)])


BENCHMARKS: dict[str, Benchmark] = {b.name: b for b in [
    Benchmark("adder", "adder", "combinational", [("a", 16), ("b", 16), ("cin", 1)], 2_359_296, False, _adder),
    Benchmark("bcdadder", "bcdadder", "combinational", [("a", 4), ("b", 4)], 256, True, _bcdadder),
    Benchmark("divide", "divide", "combinational", [("n", 8), ("d", 8)], 65_536, False, _divide),
    Benchmark("mod3", "mod3", "combinational", [("x", 8)], 256, True, _mod3),
    Benchmark("popcount", "popcount", "combinational", [("x", 8)], 256, False, _popcount),
    Benchmark("addertree", "addertree", "clocked", [(f, 16) for f in "abcde"], 625, False, _addertree),
    Benchmark("andreg", "reg_and", "clocked", [], 8, True, _andreg),
    Benchmark("gcd", "gcd", "clocked", [("a", GCD_WIDTH), ("b", GCD_WIDTH)], 262_144, False, _gcd_cases),
]}


def names() -> list[str]:
    return list(BENCHMARKS)


def get(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}") from None


BUNDLED_SAMPLES = 200


def bundled_vectors(b: Benchmark) -> VectorSet:
    """Contents of the bundled CSV: the whole space for small benchmarks,
    otherwise a fixed sample (gcd also gets the 12, 8 example first)."""
    if b.exhaustive:
        return b.vectors()
    cases = b.cases(BUNDLED_SAMPLES, seed=0)
    if b.name == "gcd":
        cases = {k: np.concatenate([_u([v]), cases[k]]) for k, v in (("a", 12), ("b", 8))}
    return b.make(cases)
