"""Generators for the bundled benchmark netlists.

Run ``python3 -m netlistc.benchmarks`` to rewrite the ``.v`` and ``.csv``
files next to this package; a test checks the committed files are up to date.
"""

from __future__ import annotations

from .builder import (
    ONE, ZERO, NetBuilder, full_adder_gates, half_adder_gates, ripple_add, ripple_sub,
)

GCD_WIDTH = 9

ANDREG = """\
module reg_and (clk, a, b, out);
  input a, b, clk;
  output out;
  wire a_inv;
  FDR fdr (.C(clk), .D(b), .R(a_inv), .Q(out));
  INV inv (.I(a), .O(a_inv));
endmodule
"""


def build_adder() -> str:
    b = NetBuilder("adder")
    xs = b.input("a", 16)
    ys = b.input("b", 16)
    cin = b.input("cin")[0]
    s = b.output("sum", 16)
    co = b.output("cout")[0]
    ripple_add(b, xs, ys, cin, outs=s, cout=co)
    return b.text()


def build_bcdadder() -> str:
    b = NetBuilder("bcdadder")
    xs = b.input("a", 4)
    ys = b.input("b", 4)
    cin = b.input("cin")[0]
    s = b.output("s", 4)
    cout = b.output("cout")[0]
    z, z4 = ripple_add(b, xs, ys, cin, outs=[s[0], None, None, None], luts=True)
    # cout = z4 | (z3 & (z2 | z1))
    t = b.gate("OR2", z[2], z[1])
    u = b.gate("NAND2", z[3], t)
    v = b.gate("INV", z4)
    carry = b.gate("NAND2", u, v)
    b.gate("BUF", carry, out=cout)
    # add 6 when carrying: bits 1 and 2 receive the carry
    b.gate("XOR2", z[1], carry, out=s[1])
    c1 = b.gate("AND2", z[1], carry)
    b.lut(lambda p, q, r: p ^ q ^ r, z[2], carry, c1, out=s[2])
    c2 = b.lut(lambda p, q, r: (p & q) | (p & r) | (q & r), z[2], carry, c1)
    n = b.gate("XNOR2", z[3], c2)
    b.gate("INV", n, out=s[3])
    return b.text()


def build_mod3() -> str:
    b = NetBuilder("mod3")
    x = b.input("x", 8)
    r = b.output("r", 3)

    def nib(bits):
        lo = b.lut(lambda *v: (sum(bit << i for i, bit in enumerate(v)) % 3) & 1, *bits)
        hi = b.lut(lambda *v: (sum(bit << i for i, bit in enumerate(v)) % 3) >> 1, *bits)
        return lo, hi

    l0, l1 = nib(x[0:4])
    h0, h1 = nib(x[4:8])
    # 16 = 1 (mod 3), so x mod 3 = (low nibble + high nibble) mod 3
    b.lut(lambda a0, a1, c0, c1: ((a0 + 2 * a1 + c0 + 2 * c1) % 3) & 1, l0, l1, h0, h1, out=r[0])
    b.lut(lambda a0, a1, c0, c1: ((a0 + 2 * a1 + c0 + 2 * c1) % 3) >> 1, l0, l1, h0, h1, out=r[1])
    b.const(0, out=r[2])
    return b.text()


def build_popcount() -> str:
    b = NetBuilder("popcount")
    x = b.input("x", 8)
    o = b.output("count", 4)
    s0, c0 = full_adder_gates(b, x[0], x[1], x[2])
    s1, c1 = full_adder_gates(b, x[3], x[4], x[5])
    s2, c2 = half_adder_gates(b, x[6], x[7])
    _, k1 = full_adder_gates(b, s0, s1, s2, s_out=o[0])
    t, u = full_adder_gates(b, c0, c1, c2)
    _, v = half_adder_gates(b, t, k1, s_out=o[1])
    half_adder_gates(b, u, v, s_out=o[2], c_out=o[3])
    return b.text()


def build_divide() -> str:
    """Restoring array divider, 8-bit by 8-bit; quotient only."""
    b = NetBuilder("divide")
    n = b.input("n", 8)
    d = b.input("d", 8)
    q = b.output("q", 8)
    rem = [ZERO] * 8
    for i in range(7, -1, -1):
        shifted = [n[i]] + rem          # 9 bits, LSB first
        diff, borrow = ripple_sub(b, shifted, d + [ZERO])
        b.gate("INV", borrow, out=q[i])
        if i:
            rem = [b.lut(lambda sel, t, keep: keep if sel else t, borrow, diff[j], shifted[j])
                   for j in range(8)]
    return b.text()


def build_addertree() -> str:
    """a+b and c+d are registered, their sum is registered, and that plus e
    is registered into ``out``: three stages, 64 flip-flops."""
    b = NetBuilder("addertree")
    clk = b.input("clk")[0]
    rst = b.input("rst")[0]
    a, bb, c, d, e = (b.input(n, 16) for n in "abcde")
    out = b.output("out", 16)
    s1, _ = ripple_add(b, a, bb, ZERO, drop_carry=True)
    s2, _ = ripple_add(b, c, d, ZERO, drop_carry=True)
    r1 = [b.ff("FDCE", clk, s, CE=ONE, CLR=rst, inst="r1") for s in s1]
    r2 = [b.ff("FDCE", clk, s, CE=ONE, CLR=rst, inst="r2") for s in s2]
    s3, _ = ripple_add(b, r1, r2, ZERO, luts=True, drop_carry=True)
    r3 = [b.ff("FDRE", clk, s, CE=ONE, R=rst, inst="r3") for s in s3]
    s4, _ = ripple_add(b, r3, e, ZERO, drop_carry=True)
    for s, o in zip(s4, out):
        b.ff("FD", clk, s, out=o, inst="ro")
    return b.text()


def build_gcd(width: int = GCD_WIDTH) -> str:
    """Subtractive GCD.  ``start`` loads a and b; afterwards the larger
    register is reduced by the smaller until they are equal or one is 0."""
    b = NetBuilder("gcd")
    clk = b.input("clk")[0]
    start = b.input("start")[0]
    a = b.input("a", width)
    bv = b.input("b", width)
    result = b.output("result", width)
    done_o = b.output("done")[0]
    x = [b.wire("x") for _ in range(width)]
    y = [b.wire("y") for _ in range(width)]
    dx, x_lt = ripple_sub(b, x, y)
    dy, gt = ripple_sub(b, y, x)        # borrow of y - x means x > y
    eq = b.gate("NOR2", x_lt, gt)

    def is_zero(bits):
        parts = [b.gate(f"OR{len(bits[i:i + 4])}", *bits[i:i + 4]) if len(bits[i:i + 4]) > 1 else bits[i]
                 for i in range(0, len(bits), 4)]
        while len(parts) > 1:
            grp = parts[:4]
            parts = parts[4:] + [b.gate(f"OR{len(grp)}", *grp)]
        return b.gate("INV", parts[0])

    xz = is_zero(x)
    yz = is_zero(y)
    done = b.gate("OR3", eq, xz, yz)
    b.gate("BUF", done, out=done_o)
    for i in range(width):
        nx = b.lut(lambda st, ai, dn, g, dxi, xi: ai if st else (dxi if (not dn and g) else xi),
                   start, a[i], done, gt, dx[i], x[i])
        ny = b.lut(lambda st, bi, dn, g, dyi, yi: bi if st else (dyi if (not dn and not g) else yi),
                   start, bv[i], done, gt, dy[i], y[i])
        b.ff("FD", clk, nx, out=x[i], inst="xr")
        b.ff("FDC", clk, ny, out=y[i], inst="yr", CLR=ZERO)
        b.lut(lambda z, xi, yi: yi if z else xi, xz, x[i], y[i], out=result[i])
    return b.text()


GENERATORS = {
    "adder": build_adder,
    "bcdadder": build_bcdadder,
    "divide": build_divide,
    "mod3": build_mod3,
    "popcount": build_popcount,
    "addertree": build_addertree,
    "andreg": lambda: ANDREG,
    "gcd": build_gcd,
}

