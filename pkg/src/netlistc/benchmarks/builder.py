"""A tiny programmatic netlist writer used to generate the bundled designs."""

from __future__ import annotations


def lut_init(k: int, fn) -> int:
    """INIT mask of a k-input LUT computing ``fn(i0, i1, ...)``; I0 is the
    least significant address bit."""
    mask = 0
    for addr in range(1 << k):
        bits = [(addr >> i) & 1 for i in range(k)]
        if fn(*bits) & 1:
            mask |= 1 << addr
    return mask


ZERO = "1'b0"
ONE = "1'b1"


class NetBuilder:
    def __init__(self, name: str):
        self.name = name
        self.ports: list[tuple[str, str, int]] = []
        self.wires: list[str] = []
        self.cells: list[str] = []
        self._n = 0
        self._counts: dict[str, int] = {}

    def _bits(self, name: str, width: int) -> list[str]:
        return [name] if width == 1 else [f"{name}[{i}]" for i in range(width)]

    def input(self, name: str, width: int = 1) -> list[str]:
        self.ports.append(("input", name, width))
        return self._bits(name, width)

    def output(self, name: str, width: int = 1) -> list[str]:
        self.ports.append(("output", name, width))
        return self._bits(name, width)

    def wire(self, hint: str = "n") -> str:
        self._n += 1
        w = f"{hint}_{self._n}"
        self.wires.append(w)
        return w

    def _inst(self, kind: str, hint: str | None) -> str:
        base = (hint or kind.lower())
        n = self._counts.get(base, 0)
        self._counts[base] = n + 1
        return f"{base}_{n}"

    def cell(self, kind: str, pins: dict[str, str], out_pin: str, out: str | None = None,
             params: dict[str, str] | None = None, inst: str | None = None) -> str:
        if out is None:
            out = self.wire((inst or kind).lower())
        name = self._inst(kind, inst)
        conns = ", ".join(f".{p}({v})" for p, v in list(pins.items()) + [(out_pin, out)])
        ps = ""
        if params:
            ps = " #(" + ", ".join(f".{k}({v})" for k, v in params.items()) + ")"
        self.cells.append(f"  {kind}{ps} {name} ({conns});")
        return out

    def gate(self, kind: str, *ins: str, out: str | None = None, inst: str | None = None) -> str:
        names = ["I"] if len(ins) == 1 else [f"I{i}" for i in range(len(ins))]
        return self.cell(kind, dict(zip(names, ins)), "O", out, inst=inst)

    def lut(self, fn, *ins: str, out: str | None = None, inst: str | None = None) -> str:
        k = len(ins)
        init = lut_init(k, fn)
        width = 1 << k
        digits = max(1, width // 4)
        return self.cell(f"LUT{k}", {f"I{i}": v for i, v in enumerate(ins)}, "O", out,
                         {"INIT": f"{width}'h{init:0{digits}X}"}, inst=inst)

    def const(self, value: int, out: str | None = None) -> str:
        return self.cell("CONST1" if value else "CONST0", {}, "O", out)

    def ff(self, kind: str, clk: str, d: str, out: str | None = None, inst: str | None = None,
           **ctrl: str) -> str:
        pins = {"C": clk}
        for p in ("CE", "CLR"):
            if p in ctrl:
                pins[p] = ctrl[p]
        pins["D"] = d
        if "R" in ctrl:
            pins["R"] = ctrl["R"]
        return self.cell(kind, pins, "Q", out, inst=inst)

    def text(self) -> str:
        lines = [f"module {self.name} ({', '.join(n for _, n, _ in self.ports)});"]
        for direction, n, w in self.ports:
            rng = f" [{w - 1}:0]" if w > 1 else ""
            lines.append(f"  {direction}{rng} {n};")
        for w in self.wires:
            lines.append(f"  wire {w};")
        lines.extend(self.cells)
        lines.append("endmodule")
        return "\n".join(lines) + "\n"


# ---- reusable arithmetic blocks -------------------------------------------

def full_adder_gates(b: NetBuilder, x: str, y: str, c: str, s_out: str | None = None,
                     c_out: str | None = None) -> tuple[str, str]:
    """Five-gate full adder; returns (sum, carry)."""
    t = b.gate("XOR2", x, y)
    s = b.gate("XOR2", t, c, out=s_out)
    g = b.gate("AND2", x, y)
    p = b.gate("AND2", t, c)
    co = b.gate("OR2", g, p, out=c_out)
    return s, co


def half_adder_gates(b: NetBuilder, x: str, y: str, s_out: str | None = None,
                     c_out: str | None = None) -> tuple[str, str]:
    return b.gate("XOR2", x, y, out=s_out), b.gate("AND2", x, y, out=c_out)


def full_adder_luts(b: NetBuilder, x: str, y: str, c: str, s_out: str | None = None,
                    c_out: str | None = None) -> tuple[str, str]:
    s = b.lut(lambda p, q, r: p ^ q ^ r, x, y, c, out=s_out)
    co = b.lut(lambda p, q, r: (p & q) | (p & r) | (q & r), x, y, c, out=c_out)
    return s, co


def ripple_add(b: NetBuilder, xs: list[str], ys: list[str], cin: str, outs: list[str] | None = None,
               cout: str | None = None, luts: bool = False, drop_carry: bool = False) -> tuple[list[str], str | None]:
    """Ripple-carry sum of two equal-width operands.  With ``drop_carry``
    the final carry is not built at all."""
    fa = full_adder_luts if luts else full_adder_gates
    sums = []
    c = cin
    n = len(xs)
    for i, (x, y) in enumerate(zip(xs, ys)):
        s_out = None if outs is None else outs[i]
        if drop_carry and i == n - 1:
            sums.append(b.lut(lambda p, q, r: p ^ q ^ r, x, y, c, out=s_out) if luts else
                        b.gate("XOR2", b.gate("XOR2", x, y), c, out=s_out))
            return sums, None
        s, c = fa(b, x, y, c, s_out, cout if i == n - 1 else None)
        sums.append(s)
    return sums, c


def ripple_sub(b: NetBuilder, xs: list[str], ys: list[str]) -> tuple[list[str], str]:
    """x - y with borrow chain; returns (difference bits, borrow out)."""
    diff = []
    bw = ZERO
    for x, y in zip(xs, ys):
        diff.append(b.lut(lambda p, q, r: p ^ q ^ r, x, y, bw))
        bw = b.lut(lambda p, q, r: ((p ^ 1) & q) | ((p ^ 1) & r) | (q & r), x, y, bw)
    return diff, bw
