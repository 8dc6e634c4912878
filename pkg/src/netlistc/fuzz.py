"""Seeded random netlists and stimulus for differential testing."""

from __future__ import annotations

import random

import numpy as np

from . import cells
from .netlist import FlatDesign
from .vectors import VectorSet

__all__ = ["random_netlist", "random_vectors"]

_COMB = ["AND2", "AND3", "AND4", "OR2", "OR3", "OR4", "XOR2", "XNOR2", "NAND2", "NOR2",
         "INV", "BUF", "CONST0", "CONST1", "LUT1", "LUT2", "LUT3", "LUT4", "LUT5", "LUT6"]
_FF = ["FD", "FDR", "FDRE", "FDC", "FDCE"]


def random_netlist(seed: int, n_cells: int = 20, n_data: int = 4, n_clocks: int = 1,
                   n_outputs: int = 3, ff_prob: float = 0.3, feedback: bool = True,
                   name: str = "fuzz") -> str:
    """A well-formed random design.

    Combinational pins read top-level inputs, earlier cell outputs, or any
    flip-flop output, so every cycle passes through a flip-flop.  Flip-flop
    data pins read any signal when ``feedback`` is set.  Clock pins read
    clock inputs and CLR pins read data inputs only.
    """
    rng = random.Random(seed)
    data = [f"d[{i}]" for i in range(n_data)]
    clocks = [f"clk{i}" for i in range(n_clocks)]
    is_ff = [rng.random() < ff_prob for _ in range(n_cells)]
    wires = [f"w{i}" for i in range(n_cells)]
    ff_out = [w for w, f in zip(wires, is_ff) if f]

    def pick(pool: list[str]) -> str:
        r = rng.random()
        if r < 0.03:
            return "1'b0"
        if r < 0.06:
            return "1'b1"
        return rng.choice(pool)

    lines = []
    for i in range(n_cells):
        if is_ff[i]:
            kind = cells.get_kind(rng.choice(_FF))
            pool = data + (wires if feedback else wires[:i])
            conns = []
            for p in kind.inputs:
                if p == "C":
                    conns.append(f".C({rng.choice(clocks)})")
                elif p == "CLR":
                    conns.append(f".CLR({rng.choice(data)})")
                elif rng.random() < 0.05:
                    continue            # unconnected: defaults to 0
                else:
                    conns.append(f".{p}({pick(pool)})")
            conns.append(f".Q({wires[i]})")
            lines.append(f"  {kind.name} u{i} ({', '.join(conns)});")
            continue
        kind = cells.get_kind(rng.choice(_COMB))
        pool = data + wires[:i] + [w for w in ff_out if w not in wires[:i]]
        conns = [f".{p}({pick(pool)})" for p in kind.inputs] + [f".O({wires[i]})"]
        param = ""
        if kind.lut_size:
            k = kind.lut_size
            param = f" #(.INIT({1 << k}'h{rng.getrandbits(1 << k):X}))"
        lines.append(f"  {kind.name}{param} u{i} ({', '.join(conns)});")
    for j in range(n_outputs):
        lines.append(f"  BUF ob{j} (.I({rng.choice(wires + data)}), .O(q[{j}]));")
    ports = clocks + ["d", "q"]
    head = [f"module {name} ({', '.join(ports)});"]
    head += [f"  input {c};" for c in clocks]
    head.append(f"  input [{n_data - 1}:0] d;")
    head.append(f"  output [{n_outputs - 1}:0] q;")
    head += [f"  wire {w};" for w in wires]
    return "\n".join(head + lines + ["endmodule"]) + "\n"


def random_vectors(design: FlatDesign, rows: int, seed: int, cases: int = 1) -> VectorSet:
    """Uniform random stimulus; ``cases`` independent runs of ``rows`` passes."""
    rng = np.random.default_rng(seed)
    cols = []
    for p in design.inputs:
        if p.width >= 64:
            cols.append(rng.integers(0, 1 << 63, size=rows * cases, dtype=np.uint64) * 2
                        + rng.integers(0, 2, size=rows * cases, dtype=np.uint64))
        else:
            cols.append(rng.integers(0, 1 << p.width, size=rows * cases, dtype=np.uint64))
    stim = np.column_stack(cols) if cols else np.zeros((rows * cases, 0), dtype=np.uint64)
    case = np.repeat(np.arange(cases), rows) if cases > 1 else None
    return VectorSet.build([p.name for p in design.inputs], [], stim, case=case)
