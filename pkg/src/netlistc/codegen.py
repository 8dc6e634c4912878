"""Code generation: LLVM-style SSA text, a C header, and an equivalent C99 source.

Flip-flop state lives in module-level globals (one ``gv1``/``gv2``/``clk``
triple per instance), so a generated image holds exactly one design
instance and its top function is not reentrant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import cells
from .compiler import Compiled
from .netlist import CONST0, CONST1, FlatCell, FlatDesign, FlatPort
from .schedule import FinalSchedule, SlotMode

__all__ = [
    "CodegenError", "IrModule", "HeaderDecl",
    "sop_terms", "mangle_names", "c_type", "prim_name",
    "emit_primitive_fns", "emit_top", "emit_ir", "emit_header", "emit_c_source", "emit_c_harness",
]


class CodegenError(Exception):
    pass


def sop_terms(k: int, mask: int) -> list[int]:
    """Minterms of a LUT mask: one product term per set bit, unminimised."""
    return [a for a in range(1 << k) if (mask >> a) & 1]


_C_WIDTHS = (8, 16, 32, 64)


def c_width(width: int) -> int:
    for w in _C_WIDTHS:
        if width <= w:
            return w
    raise CodegenError(f"width {width} exceeds 64 bits")


def c_type(port: FlatPort) -> str:
    try:
        return f"uint{c_width(port.width)}_t"
    except CodegenError:
        raise CodegenError(
            f"port {port.name!r} is {port.width} bits wide; the C interface supports at most 64") from None


def mangle_names(names: list[str]) -> dict[str, str]:
    """Map instance paths to C/LLVM identifiers; ``.`` becomes ``__``."""
    out: dict[str, str] = {}
    used: set[str] = set()
    for name in names:
        base = re.sub(r"[^A-Za-z0-9_]", "_", name.replace(".", "__"))
        if not base or base[0].isdigit():
            base = "_" + base
        cand = base
        n = 1
        while cand in used:
            cand = f"{base}_{n}"
            n += 1
        used.add(cand)
        out[name] = cand
    return out


def prim_name(cell: FlatCell) -> str:
    if cell.kind.lut_size:
        return f"prim_{cell.kind.name.lower()}_{cell.params['INIT']:x}"
    return f"prim_{cell.kind.name.lower()}"


def _used_prims(design: FlatDesign) -> dict[str, FlatCell]:
    prims: dict[str, FlatCell] = {}
    for cell in design.cells:
        prims.setdefault(prim_name(cell), cell)
    return dict(sorted(prims.items()))


def _consumed(design: FlatDesign, fs: FinalSchedule) -> set[int]:
    used = set()
    for slot in fs.slots:
        cell = design.cells[slot.cell]
        if slot.mode is SlotMode.COPY:
            if "CLR" in cell.pins:
                used.add(cell.pins["CLR"])
            continue
        used.update(s for _, s in cell.input_signals())
    for port in design.outputs:
        used.update(port.bits)
    return used


# --------------------------------------------------------------------------
# LLVM text

def _ll_args(kind: cells.PrimitiveKind) -> list[str]:
    return [f"%{p.lower()}" for p in kind.inputs]


def _ll_gate(kind: cells.PrimitiveKind) -> list[str]:
    a = _ll_args(kind)
    n = kind.name
    if n == "CONST0":
        return ["  ret i1 false"]
    if n == "CONST1":
        return ["  ret i1 true"]
    if n == "BUF":
        return [f"  ret i1 {a[0]}"]
    if n == "INV":
        return [f"  %o = xor i1 {a[0]}, true", "  ret i1 %o"]
    op = {"AND": "and", "OR": "or", "XOR": "xor", "XNOR": "xor", "NAND": "and", "NOR": "or"}[n.rstrip("234")]
    body = []
    acc = a[0]
    for i, x in enumerate(a[1:]):
        body.append(f"  %t{i} = {op} i1 {acc}, {x}")
        acc = f"%t{i}"
    if n in ("XNOR2", "NAND2", "NOR2"):
        body.append(f"  %o = xor i1 {acc}, true")
        acc = "%o"
    body.append(f"  ret i1 {acc}")
    return body


def _ll_lut(k: int, mask: int) -> list[str]:
    body = []
    negated = set()
    terms = sop_terms(k, mask)
    for t in terms:
        for i in range(k):
            if not (t >> i) & 1:
                negated.add(i)
    for i in sorted(negated):
        body.append(f"  %n{i} = xor i1 %i{i}, true")
    products = []
    for t in terms:
        lits = [f"%i{i}" if (t >> i) & 1 else f"%n{i}" for i in range(k)]
        acc = lits[0]
        for j, lit in enumerate(lits[1:]):
            name = f"%p{t}_{j}"
            body.append(f"  {name} = and i1 {acc}, {lit}")
            acc = name
        products.append(acc)
    if not products:
        body.append("  ret i1 false")
        return body
    acc = products[0]
    for j, p in enumerate(products[1:]):
        body.append(f"  %s{j} = or i1 {acc}, {p}")
        acc = f"%s{j}"
    body.append(f"  ret i1 {acc}")
    return body


def _ll_ff(kind: cells.PrimitiveKind) -> list[str]:
    ins = kind.inputs
    body = [
        "  %prev = load i1, i1* %gvclk",
        "  %edge = xor i1 %prev, %c",
        "  %pos = and i1 %edge, %c",
        "  %cur = load i1, i1* %gv2",
    ]
    nxt = "%d"
    if "R" in ins:
        body += ["  %rn = xor i1 %r, true", "  %dr = and i1 %d, %rn"]
        nxt = "%dr"
    if "CE" in ins:
        body.append(f"  %de = select i1 %ce, i1 {nxt}, i1 %cur")
        nxt = "%de"
    body += [
        "  %held = load i1, i1* %gv1",
        f"  %g = select i1 %pos, i1 {nxt}, i1 %held",
    ]
    g, q = "%g", "%cur"
    if "CLR" in ins:
        body += [
            "  %keep = xor i1 %clr, true",
            "  %gc = and i1 %g, %keep",
            "  %qc = and i1 %cur, %keep",
        ]
        g, q = "%gc", "%qc"
    body += [
        f"  store i1 {g}, i1* %gv1",
        f"  store i1 {g}, i1* %gv2",
        "  ; remember the clock level for edge detection",
        "  store i1 %c, i1* %gvclk",
        f"  ret i1 {q}",
    ]
    return body


def emit_primitive_fns(design_or_cells) -> dict[str, str]:
    """One function per primitive kind used (per distinct INIT for LUTs)."""
    if isinstance(design_or_cells, FlatDesign):
        prims = _used_prims(design_or_cells)
    else:
        prims = {prim_name(c): c for c in design_or_cells}
    fns = {}
    for name, cell in sorted(prims.items()):
        kind = cell.kind
        params = [f"i1 {a}" for a in _ll_args(kind)]
        if kind.clocked:
            params += ["i1* %gv1", "i1* %gv2", "i1* %gvclk"]
            body = _ll_ff(kind)
        elif kind.lut_size:
            body = _ll_lut(kind.lut_size, cell.params["INIT"])
        else:
            body = _ll_gate(kind)
        fns[name] = "\n".join(
            [f"define internal i1 @{name}({', '.join(params)}) {{", "entry:"] + body + ["}"])
    return fns


@dataclass
class IrModule:
    name: str
    source_filename: str
    globals: list[str]
    functions: dict[str, str]
    top: str
    ports: list[FlatPort]
    symbols: dict[str, str] = field(default_factory=dict)

    @property
    def text(self) -> str:
        parts = [f"; ModuleID = '{self.name}'", f'source_filename = "{self.source_filename}"', ""]
        if self.globals:
            parts += self.globals + [""]
        for fn in self.functions.values():
            parts += [fn, ""]
        parts.append(self.top)
        return "\n".join(parts) + "\n"


def _ll_out_type(port: FlatPort) -> str:
    return f"i{c_width(port.width)}" if port.width <= 64 else f"i{port.width}"


def emit_top(fs: FinalSchedule, design: FlatDesign, source_filename: str = "") -> IrModule:
    """Wire the scheduled calls together through SSA temporaries."""
    syms = _symbols(design)
    top_name = syms[design.name]
    globals_ = []
    for cell in design.cells:
        if cell.clocked:
            g = syms[cell.name]
            globals_ += [f"@{g}__gv1 = internal global i1 false",
                         f"@{g}__gv2 = internal global i1 false",
                         f"@{g}__clk = internal global i1 false"]

    params = [f"i{p.width} %{n}" if p.direction == "input" else f"{_ll_out_type(p)}* %{n}"
              for p, n in _port_params(design, design.ports)]
    body = []
    val = {CONST0: "false", CONST1: "true"}
    tmp = 0
    for port, pname in _port_params(design, design.inputs):
        for i, s in enumerate(port.bits):
            if port.width == 1:
                val[s] = f"%{pname}"
                continue
            t = f"%{pname}.sh{i}"
            body.append(f"  {t} = lshr i{port.width} %{pname}, {i}")
            body.append(f"  {t}.m = and i{port.width} {t}, 1")
            body.append(f"  %v.{s} = trunc i{port.width} {t}.m to i1")
            val[s] = f"%v.{s}"

    for slot in fs.slots:
        cell = design.cells[slot.cell]
        fn = prim_name(cell)
        if cell.clocked:
            g = syms[cell.name]
            state = [f"i1* @{g}__gv1", f"i1* @{g}__gv2", f"i1* @{g}__clk"]
            if slot.mode is SlotMode.COPY:
                tmp += 1
                body.append(f"  %hold.{tmp} = load i1, i1* @{g}__clk")
                args = []
                for p in cell.kind.inputs:
                    if p == "C":
                        args.append(f"i1 %hold.{tmp}")
                    elif p == "CLR":
                        args.append(f"i1 {val[cell.pins[p]]}")
                    else:
                        args.append("i1 false")
            else:
                args = [f"i1 {val[cell.pins[p]]}" for p in cell.kind.inputs]
            call = f"call i1 @{fn}({', '.join(args + state)})"
            if slot.mode is SlotMode.ORIGINAL:
                body.append(f"  {call} ; {slot.name} update")
                continue
        else:
            args = [f"i1 {val[cell.pins[p]]}" for p in cell.kind.inputs]
            call = f"call i1 @{fn}({', '.join(args)})"
        s = cell.out_signal
        body.append(f"  %v.{s} = {call} ; {slot.name}")
        val[s] = f"%v.{s}"

    for port, pname in _port_params(design, design.outputs):
        ty = _ll_out_type(port)
        acc = None
        for i, s in enumerate(port.bits):
            z = f"%{pname}.z{i}"
            body.append(f"  {z} = zext i1 {val[s]} to {ty}")
            if i:
                body.append(f"  {z}.s = shl {ty} {z}, {i}")
                z = f"{z}.s"
            if acc is None:
                acc = z
            else:
                body.append(f"  %{pname}.or{i} = or {ty} {acc}, {z}")
                acc = f"%{pname}.or{i}"
        body.append(f"  store {ty} {acc}, {ty}* %{pname}")
    body.append("  ret void")
    top = "\n".join([f"define void @{top_name}({', '.join(params)}) {{", "entry:"] + body + ["}"])
    reset = [f"  store i1 false, {g.split(' = ')[0].replace('@', 'i1* @')}" for g in globals_]
    top += "\n\n" + "\n".join([f"define void @{top_name}_reset() {{", "entry:"] + reset + ["  ret void", "}"])
    return IrModule(design.name, source_filename or f"{design.name}.v", globals_,
                    emit_primitive_fns(design), top, list(design.ports), syms)


_C_KEYWORDS = frozenset("""auto break case char const continue default do double else enum extern
float for goto if inline int long register restrict return short signed sizeof static struct
switch typedef union unsigned void volatile while main""".split())
_RESERVED = re.compile(r"^(s\d+|prim_.*|uint\d+_t)$")


def _port_params(design: FlatDesign, ports: list[FlatPort]) -> list[tuple[FlatPort, str]]:
    names = []
    for p in design.ports:
        names.append(p.name + "_p" if p.name in _C_KEYWORDS or _RESERVED.match(p.name) else p.name)
    syms = mangle_names(names)
    table = dict(zip((p.name for p in design.ports), (syms[n] for n in names)))
    return [(p, table[p.name]) for p in ports]


def _top_name(name: str) -> str:
    top = mangle_names([name])[name]
    return top + "_top" if top in _C_KEYWORDS or _RESERVED.match(top) else top


def _symbols(design: FlatDesign) -> dict[str, str]:
    """Top function and flip-flop state names; rejects clashes between
    file-scope identifiers."""
    syms = mangle_names([c.name for c in design.cells if c.clocked])
    top = _top_name(design.name)
    scope = {top: design.name, top + "_reset": design.name}
    for name in _used_prims(design):
        scope[name] = name
    for inst, base in syms.items():
        for suffix in ("__gv1", "__gv2", "__clk"):
            g = base + suffix
            if g in scope:
                raise CodegenError(f"identifier {g!r} for {inst} clashes with {scope[g]}")
            scope[g] = inst
    syms[design.name] = top
    return syms


def emit_ir(compiled: Compiled, source_filename: str = "") -> IrModule:
    return emit_top(compiled.schedule, compiled.design, source_filename)


# --------------------------------------------------------------------------
# C header

@dataclass
class HeaderDecl:
    guard: str
    prototype: str
    notes: list[str]
    reset: str = ""

    @property
    def text(self) -> str:
        lines = [
            "/* Calling convention for a compiled netlist.",
            " *",
            " * Inputs are passed by value, outputs through pointers, in port",
            " * declaration order.  A port of width w occupies bits w-1..0 of the",
            " * smallest of uint8_t/uint16_t/uint32_t/uint64_t that holds it; unused",
            " * high bits of inputs are ignored and are written as zero on outputs.",
            " * One call is one evaluation pass; a clock cycle is a pass with the",
            " * clock high followed by a pass with it low.",
            " */",
            f"#ifndef {self.guard}",
            f"#define {self.guard}",
            "",
            "#include <stdint.h>",
            "",
            "#ifdef __cplusplus",
            'extern "C" {',
            "#endif",
            "",
        ]
        lines += [f"/* {n} */" for n in self.notes]
        lines.append(self.prototype)
        if self.reset:
            lines += ["/* Return every flip-flop to its all-zero reset state. */", self.reset]
        lines += [
            "",
            "#ifdef __cplusplus",
            "}",
            "#endif",
            "",
            f"#endif /* {self.guard} */",
        ]
        return "\n".join(lines) + "\n"


def _c_params(design: FlatDesign) -> list[str]:
    return [f"{c_type(p)} {n}" if p.direction == "input" else f"{c_type(p)}* {n}"
            for p, n in _port_params(design, design.ports)]


def emit_header(m: IrModule | FlatDesign) -> HeaderDecl:
    if isinstance(m, IrModule):
        ports = [p for p in m.ports]
    else:
        ports = list(m.ports)
    name = _top_name(m.name)
    for p in ports:
        c_type(p)
    params = _c_params(FlatDesign(m.name, ports, [], []))
    proto = f"void {name}({', '.join(params) if params else 'void'});"
    notes = []
    for p in ports:
        rng = f"[{p.msb}:{p.lsb}]" if p.width > 1 else ""
        notes.append(f"{p.name}: {p.direction} {rng} {p.width} bit(s) in {c_type(p)}".replace("  ", " "))
    guard = "NETLISTC_" + re.sub(r"[^A-Za-z0-9]", "_", name).upper() + "_H"
    return HeaderDecl(guard, proto, notes, f"void {name}_reset(void);")


# --------------------------------------------------------------------------
# C99 source

def _c_gate(kind: cells.PrimitiveKind) -> str:
    a = [p.lower() for p in kind.inputs]
    n = kind.name
    match n:
        case "CONST0":
            return "0u"
        case "CONST1":
            return "1u"
        case "BUF":
            return a[0]
        case "INV":
            return f"{a[0]} ^ 1u"
        case "XNOR2":
            return f"{a[0]} ^ {a[1]} ^ 1u"
        case "NAND2":
            return f"({a[0]} & {a[1]}) ^ 1u"
        case "NOR2":
            return f"({a[0]} | {a[1]}) ^ 1u"
    op = {"AND": " & ", "OR": " | ", "XOR": " ^ "}[n.rstrip("234")]
    return op.join(a)


def _c_lut(k: int, mask: int) -> str:
    terms = []
    for t in sop_terms(k, mask):
        lits = [f"i{i}" if (t >> i) & 1 else f"(i{i} ^ 1u)" for i in range(k)]
        terms.append("(" + " & ".join(lits) + ")")
    return " | ".join(terms) if terms else "0u"


def _c_prim(name: str, cell: FlatCell) -> str:
    kind = cell.kind
    params = [f"uint8_t {p.lower()}" for p in kind.inputs]
    if not kind.clocked:
        expr = _c_lut(kind.lut_size, cell.params["INIT"]) if kind.lut_size else _c_gate(kind)
        unused = "".join(f"    (void){p.lower()};\n" for p in kind.inputs) if expr == "0u" else ""
        return (f"static uint8_t {name}({', '.join(params) or 'void'})\n"
                f"{{\n{unused}    return (uint8_t)({expr});\n}}\n")
    params += ["uint8_t *gv1", "uint8_t *gv2", "uint8_t *gvclk"]
    nxt = "d"
    if "R" in kind.inputs:
        nxt = "(d & (r ^ 1u))"
    if "CE" in kind.inputs:
        nxt = f"(ce ? {nxt} : *gv2)"
    lines = [
        f"static uint8_t {name}({', '.join(params)})",
        "{",
        "    uint8_t pos = (uint8_t)((*gvclk ^ c) & c);",
        f"    uint8_t g = (uint8_t)(pos ? {nxt} : *gv1);",
        "    uint8_t q = *gv2;",
    ]
    if "CLR" in kind.inputs:
        lines += ["    if (clr) {", "        g = 0;", "        q = 0;", "    }"]
    lines += [
        "    *gv1 = g;",
        "    *gv2 = g;",
        "    *gvclk = c;",
        "    return q;",
        "}",
    ]
    return "\n".join(lines) + "\n"


def emit_c_source(fs: FinalSchedule, design: FlatDesign) -> str:
    """Self-contained C99 translation with the same observable behaviour."""
    syms = _symbols(design)
    top_name = syms[design.name]
    for p in design.ports:
        c_type(p)
    out = [f"/* {design.name}: compiled netlist, one call per evaluation pass */",
           "#include <stdint.h>", ""]
    ffs = [c for c in design.cells if c.clocked]
    for c in ffs:
        g = syms[c.name]
        out.append(f"static uint8_t {g}__gv1, {g}__gv2, {g}__clk;")
    if ffs:
        out.append("")
    for name, cell in _used_prims(design).items():
        out.append(_c_prim(name, cell))

    params = _c_params(design)
    out.append(f"void {top_name}({', '.join(params) if params else 'void'});")
    out.append("")
    out.append(f"void {top_name}({', '.join(params) if params else 'void'})")
    out.append("{")
    used = _consumed(design, fs)
    val = {CONST0: "0u", CONST1: "1u"}
    for port, pname in _port_params(design, design.inputs):
        port_used = False
        for i, s in enumerate(port.bits):
            if s in used:
                port_used = True
                out.append(f"    const uint8_t s{s} = (uint8_t)(({pname} >> {i}) & 1u);")
                val[s] = f"s{s}"
        if not port_used:
            out.append(f"    (void){pname};")
    tmp = 0
    for slot in fs.slots:
        cell = design.cells[slot.cell]
        fn = prim_name(cell)
        if cell.clocked:
            g = syms[cell.name]
            state = [f"&{g}__gv1", f"&{g}__gv2", f"&{g}__clk"]
            if slot.mode is SlotMode.COPY:
                args = []
                for p in cell.kind.inputs:
                    if p == "C":
                        args.append(f"{g}__clk")
                    elif p == "CLR":
                        args.append(val[cell.pins[p]])
                    else:
                        args.append("0u")
            else:
                args = [val[cell.pins[p]] for p in cell.kind.inputs]
            call = f"{fn}({', '.join(args + state)})"
            if slot.mode is SlotMode.ORIGINAL:
                out.append(f"    (void){call}; /* {slot.name} update */")
                continue
        else:
            call = f"{fn}({', '.join(val[cell.pins[p]] for p in cell.kind.inputs)})"
        s = cell.out_signal
        if s in used:
            out.append(f"    const uint8_t s{s} = {call}; /* {slot.name} */")
            val[s] = f"s{s}"
        else:
            out.append(f"    (void){call}; /* {slot.name} */")
        tmp += 1
    for port, pname in _port_params(design, design.outputs):
        ty = c_type(port)
        parts = [f"(({ty}){val[s]} << {i})" if i else f"({ty}){val[s]}" for i, s in enumerate(port.bits)]
        out.append(f"    *{pname} = ({ty})({' | '.join(parts)});")
    out.append("}")
    out.append("")
    out.append(f"void {top_name}_reset(void);")
    out.append("")
    out.append(f"void {top_name}_reset(void)")
    out.append("{")
    for c in ffs:
        g = syms[c.name]
        out.append(f"    {g}__gv1 = 0;")
        out.append(f"    {g}__gv2 = 0;")
        out.append(f"    {g}__clk = 0;")
    out.append("}")
    return "\n".join(out) + "\n"


def emit_c_harness(design: FlatDesign, header_name: str) -> str:
    """A ``main`` that reads rows of ``case value...`` (decimal, inputs in
    port order) and prints the output values of each pass.  The design is
    reset whenever the case number changes."""
    top = _top_name(design.name)
    ins = _port_params(design, design.inputs)
    outs = _port_params(design, design.outputs)
    lines = [
        "#include <stdio.h>",
        "#include <stdint.h>",
        f'#include "{header_name}"',
        "",
        "int main(void)",
        "{",
        "    unsigned long long tag, last = 0;",
        "    int first = 1;",
    ]
    for p, n in ins:
        lines.append(f"    unsigned long long in_{n};")
    for p, n in outs:
        lines.append(f"    {c_type(p)} out_{n} = 0;")
    lines.append('    while (scanf("%llu", &tag) == 1) {')
    lines.append("        if (first || tag != last) {")
    lines.append(f"            {top}_reset();")
    lines.append("        }")
    lines.append("        first = 0;")
    lines.append("        last = tag;")
    for p, n in ins:
        lines.append(f'        if (scanf("%llu", &in_{n}) != 1) return 1;')
    args = [f"({c_type(p)})in_{n}" if p.direction == "input" else f"&out_{n}"
            for p, n in _port_params(design, design.ports)]
    lines.append(f"        {top}({', '.join(args)});")
    fmt = " ".join(["%llu"] * len(outs))
    vals = "".join(f", (unsigned long long)out_{n}" for p, n in outs)
    lines.append(f'        printf("{fmt}\\n"{vals});')
    lines.append("    }")
    lines.append("    return 0;")
    lines.append("}")
    return "\n".join(lines) + "\n"
