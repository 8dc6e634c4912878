"""Structural Verilog netlists: parsing, printing and flattening.

The accepted language is deliberately small: module headers (1995 or ANSI
style), ``input``/``output``/``wire`` declarations with optional ranges,
named-connection instantiations with ``#(.P(v))`` or ``defparam``
parameters, plain ``assign`` aliases, and comments.  Anything behavioural is
rejected with a located diagnostic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import cells

__all__ = [
    "Loc", "Diagnostic", "NetlistError",
    "BitRef", "Const", "PortDecl", "NetDecl", "CellInst", "Assign", "ModuleDef", "Netlist",
    "parse_netlist", "format_netlist",
    "FlatPort", "FlatCell", "FlatDesign", "elaborate", "load_design",
]


@dataclass(frozen=True)
class Loc:
    file: str
    line: int
    col: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


NOLOC = Loc("<unknown>", 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    loc: Loc = NOLOC

    def __str__(self):
        return f"{self.loc}: {self.severity}: {self.message}"


class NetlistError(Exception):
    """A fatal diagnostic.  ``str(err)`` is ``file:line:col: error: message``."""

    def __init__(self, message: str, loc: Loc = NOLOC):
        super().__init__(message)
        self.message = message
        self.loc = loc

    def __str__(self):
        return str(Diagnostic("error", self.message, self.loc))


# --------------------------------------------------------------------------
# syntax tree

@dataclass
class BitRef:
    """A contiguous select ``name[msb:lsb]`` in the declared index space."""
    name: str
    msb: int
    lsb: int
    loc: Loc = field(default=NOLOC, compare=False, repr=False)

    @property
    def width(self) -> int:
        return abs(self.msb - self.lsb) + 1

    def indices(self) -> list[int]:
        """Declared indices, least significant first."""
        step = 1 if self.msb >= self.lsb else -1
        return list(range(self.lsb, self.msb + step, step))


@dataclass
class Const:
    width: int
    value: int
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass
class PortDecl:
    name: str
    direction: str
    msb: int = 0
    lsb: int = 0
    loc: Loc = field(default=NOLOC, compare=False, repr=False)

    @property
    def width(self) -> int:
        return abs(self.msb - self.lsb) + 1


@dataclass
class NetDecl:
    name: str
    msb: int = 0
    lsb: int = 0
    loc: Loc = field(default=NOLOC, compare=False, repr=False)

    @property
    def width(self) -> int:
        return abs(self.msb - self.lsb) + 1


# a connection is a concatenation, most significant part first
Expr = list  # list[BitRef | Const]


@dataclass
class CellInst:
    name: str
    kind: str
    params: dict[str, int] = field(default_factory=dict)
    conns: dict[str, Expr] = field(default_factory=dict)
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass
class Assign:
    lhs: Expr
    rhs: Expr
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass
class ModuleDef:
    name: str
    ports: list[PortDecl] = field(default_factory=list)
    nets: list[NetDecl] = field(default_factory=list)
    cells: list[CellInst] = field(default_factory=list)
    assigns: list[Assign] = field(default_factory=list)
    loc: Loc = field(default=NOLOC, compare=False, repr=False)

    def port(self, name: str) -> PortDecl | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def decl(self, name: str) -> PortDecl | NetDecl | None:
        for d in self.ports:
            if d.name == name:
                return d
        for d in self.nets:
            if d.name == name:
                return d
        return None


@dataclass
class Netlist:
    modules: dict[str, ModuleDef]
    top: str
    diagnostics: list[Diagnostic] = field(default_factory=list, compare=False, repr=False)

    @property
    def top_module(self) -> ModuleDef:
        return self.modules[self.top]


# --------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<attr>\(\*.*?\*\))
  | (?P<number>(?:[0-9][0-9_]*)?\s*'[sS]?[bBoOdDhH]\s*[0-9a-fA-FxXzZ_?]+|[0-9][0-9_]*)
  | (?P<escaped>\\\S+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<directive>`[A-Za-z_]+)
  | (?P<sym>[()\[\]:;,.#={}@])
""", re.VERBOSE | re.DOTALL)

KEYWORDS = {
    "module", "endmodule", "input", "output", "inout", "wire", "assign", "defparam",
    "always", "initial", "reg", "generate", "endgenerate", "function", "task",
    "begin", "end", "parameter", "localparam", "integer", "genvar", "supply0", "supply1",
    "and", "or", "xor", "nand", "nor", "xnor", "not", "buf",
}


@dataclass
class Token:
    kind: str
    value: str
    loc: Loc


def _tokenize(source: str, filename: str) -> list[Token]:
    toks = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            loc = Loc(filename, line, pos - line_start + 1)
            if source.startswith("/*", pos):
                raise NetlistError("unterminated block comment", loc)
            raise NetlistError(f"unexpected character {source[pos]!r}", loc)
        kind = m.lastgroup
        text = m.group()
        loc = Loc(filename, line, pos - line_start + 1)
        if kind == "directive":
            raise NetlistError(f"compiler directive {text} is not supported", loc)
        if kind in ("ident", "number", "sym"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, text, loc))
        elif kind == "escaped":
            toks.append(Token("ident", text[1:], loc))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", Loc(filename, line, pos - line_start + 1)))
    return toks


_BASES = {"b": 2, "o": 8, "d": 10, "h": 16}


def _parse_number(tok: Token) -> Const:
    text = tok.value.replace("_", "").replace(" ", "").replace("\t", "")
    if "'" not in text:
        value = int(text)
        return Const(max(32, value.bit_length()), value, tok.loc)
    size, rest = text.split("'", 1)
    rest = rest.lstrip("sS")
    base = _BASES[rest[0].lower()]
    digits = rest[1:]
    if re.search(r"[xXzZ?]", digits):
        raise NetlistError(f"four-state literal {tok.value!r} is not supported", tok.loc)
    try:
        value = int(digits, base)
    except ValueError:
        raise NetlistError(f"malformed number {tok.value!r}", tok.loc) from None
    width = int(size) if size else max(32, value.bit_length())
    if width < 1:
        raise NetlistError(f"literal width must be positive in {tok.value!r}", tok.loc)
    if value >> width:
        raise NetlistError(f"literal {tok.value!r} does not fit in {width} bits", tok.loc)
    return Const(width, value, tok.loc)


# --------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, source: str, filename: str):
        self.toks = _tokenize(source, filename)
        self.i = 0
        self.filename = filename
        self.diagnostics: list[Diagnostic] = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, value: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.value == value

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.i += 1
            return True
        return False

    def expect(self, *values: str) -> Token:
        if self.tok.kind in ("sym", "kw") and self.tok.value in values:
            return self.advance()
        self.fail(values)

    def fail(self, expected) -> None:
        t = self.tok
        got = "end of file" if t.kind == "eof" else repr(t.value)
        want = " or ".join(repr(v) for v in expected)
        raise NetlistError(f"syntax error: expected {want}, got {got}", t.loc)

    def ident(self, what="identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail([what])
        return self.advance()

    def warn(self, message: str, loc: Loc):
        self.diagnostics.append(Diagnostic("warning", message, loc))

    # grammar
    def parse(self) -> list[ModuleDef]:
        modules = []
        while self.tok.kind != "eof":
            if not self.at("module"):
                self.fail(["module"])
            modules.append(self.module())
        return modules

    def module(self) -> ModuleDef:
        start = self.expect("module")
        name = self.ident("module name").value
        mod = ModuleDef(name, loc=start.loc)
        header: list[Token] = []
        ansi = False
        if self.at("#"):
            raise NetlistError("module parameters are not supported", self.tok.loc)
        if self.accept("("):
            if not self.at(")"):
                if self.at("input") or self.at("output") or self.at("inout"):
                    ansi = True
                    self.ansi_ports(mod)
                else:
                    header.append(self.ident("port name"))
                    while self.accept(","):
                        header.append(self.ident("port name"))
            self.expect(")")
        self.expect(";")

        declared: dict[str, PortDecl] = {}
        while not self.at("endmodule"):
            t = self.tok
            if t.kind == "eof":
                self.fail(["endmodule"])
            if t.kind == "kw":
                if t.value in ("input", "output", "inout"):
                    if ansi:
                        raise NetlistError("port declared again in ANSI-style module", t.loc)
                    for p in self.port_decl():
                        if p.name in declared:
                            raise NetlistError(f"duplicate declaration of {p.name!r}", p.loc)
                        declared[p.name] = p
                elif t.value == "wire":
                    mod.nets.extend(self.wire_decl())
                elif t.value == "assign":
                    mod.assigns.extend(self.assign_stmt())
                elif t.value == "defparam":
                    self.defparam(mod)
                else:
                    raise NetlistError(
                        f"'{t.value}' is not supported in a structural netlist", t.loc)
            elif t.kind == "ident":
                mod.cells.extend(self.instantiation())
            else:
                self.fail(["declaration", "instantiation", "endmodule"])
        self.expect("endmodule")

        if not ansi:
            names = [h.value for h in header]
            for h in header:
                if names.count(h.value) > 1:
                    raise NetlistError(f"duplicate port {h.value!r} in module header", h.loc)
                if h.value not in declared:
                    raise NetlistError(f"port {h.value!r} has no direction declaration", h.loc)
            for p in declared.values():
                if p.name not in names:
                    raise NetlistError(f"{p.name!r} is declared {p.direction} but is not a port of {name!r}", p.loc)
            mod.ports = [declared[n] for n in names]
        return mod

    def range_opt(self) -> tuple[int, int]:
        if not self.accept("["):
            return 0, 0
        msb = self.int_literal()
        self.expect(":")
        lsb = self.int_literal()
        self.expect("]")
        return msb, lsb

    def int_literal(self) -> int:
        if self.tok.kind != "number":
            self.fail(["integer"])
        return _parse_number(self.advance()).value

    def check_direction(self, t: Token):
        if t.value == "inout":
            raise NetlistError("inout ports are not supported (bidirectional nets)", t.loc)

    def ansi_ports(self, mod: ModuleDef):
        direction = None
        msb = lsb = 0
        while True:
            if self.tok.kind == "kw" and self.tok.value in ("input", "output", "inout"):
                t = self.advance()
                self.check_direction(t)
                direction = t.value
                self.accept("wire")
                msb, lsb = self.range_opt()
            elif direction is None:
                self.fail(["input", "output"])
            name = self.ident("port name")
            mod.ports.append(PortDecl(name.value, direction, msb, lsb, name.loc))
            if not self.accept(","):
                break

    def port_decl(self) -> list[PortDecl]:
        t = self.advance()
        self.check_direction(t)
        if self.at("reg"):
            raise NetlistError("'reg' is not supported in a structural netlist", self.tok.loc)
        self.accept("wire")
        msb, lsb = self.range_opt()
        out = []
        while True:
            name = self.ident("port name")
            out.append(PortDecl(name.value, t.value, msb, lsb, name.loc))
            if not self.accept(","):
                break
        self.expect(";")
        return out

    def wire_decl(self) -> list[NetDecl]:
        self.expect("wire")
        msb, lsb = self.range_opt()
        out = []
        while True:
            name = self.ident("net name")
            out.append(NetDecl(name.value, msb, lsb, name.loc))
            if self.at("="):
                raise NetlistError("net declaration assignments are not supported", self.tok.loc)
            if not self.accept(","):
                break
        self.expect(";")
        return out

    def expr(self) -> Expr:
        if self.accept("{"):
            parts = []
            while True:
                parts.extend(self.expr())
                if not self.accept(","):
                    break
            self.expect("}")
            return parts
        t = self.tok
        if t.kind == "number":
            return [_parse_number(self.advance())]
        if t.kind == "ident":
            self.advance()
            if self.accept("["):
                msb = self.int_literal()
                lsb = msb
                if self.accept(":"):
                    lsb = self.int_literal()
                self.expect("]")
                return [BitRef(t.value, msb, lsb, t.loc)]
            # whole-net reference, range filled in during validation
            return [BitRef(t.value, None, None, t.loc)]
        self.fail(["identifier", "constant", "'{'"])

    def assign_stmt(self) -> list[Assign]:
        self.expect("assign")
        out = []
        while True:
            loc = self.tok.loc
            lhs = self.expr()
            self.expect("=")
            rhs = self.expr()
            if not (self.at(";") or self.at(",")):
                raise NetlistError(
                    "only plain net aliases are supported in assign (no expressions)", self.tok.loc)
            out.append(Assign(lhs, rhs, loc))
            if not self.accept(","):
                break
        self.expect(";")
        return out

    def defparam(self, mod: ModuleDef):
        self.expect("defparam")
        while True:
            inst = self.ident("instance name")
            self.expect(".")
            pname = self.ident("parameter name")
            self.expect("=")
            if self.tok.kind != "number":
                self.fail(["number"])
            value = _parse_number(self.advance()).value
            for c in mod.cells:
                if c.name == inst.value:
                    c.params[pname.value] = value
                    break
            else:
                raise NetlistError(f"defparam refers to unknown instance {inst.value!r}", inst.loc)
            if not self.accept(","):
                break
        self.expect(";")

    def instantiation(self) -> list[CellInst]:
        kind = self.advance()
        params: dict[str, int] = {}
        if self.accept("#"):
            if self.tok.kind == "number":
                self.advance()
                self.warn("delay annotation ignored", kind.loc)
            elif self.accept("("):
                if self.tok.kind == "number":
                    self.advance()
                    self.expect(")")
                    self.warn("delay annotation ignored", kind.loc)
                else:
                    while True:
                        self.expect(".")
                        pname = self.ident("parameter name")
                        self.expect("(")
                        if self.tok.kind != "number":
                            self.fail(["number"])
                        params[pname.value] = _parse_number(self.advance()).value
                        self.expect(")")
                        if not self.accept(","):
                            break
                    self.expect(")")
            else:
                self.fail(["parameter list", "delay"])
        out = []
        while True:
            name = self.ident("instance name")
            inst = CellInst(name.value, kind.value, dict(params), {}, name.loc)
            self.expect("(")
            if not self.at(")"):
                while True:
                    if not self.at("."):
                        raise NetlistError("only named port connections are supported", self.tok.loc)
                    self.advance()
                    pin = self.ident("port name")
                    if pin.value in inst.conns:
                        raise NetlistError(f"port {pin.value!r} connected twice", pin.loc)
                    self.expect("(")
                    if self.accept(")"):
                        inst.conns[pin.value] = []
                    else:
                        inst.conns[pin.value] = self.expr()
                        self.expect(")")
                    if not self.accept(","):
                        break
            self.expect(")")
            out.append(inst)
            if not self.accept(","):
                break
        self.expect(";")
        return out


def _pin_loc(inst: CellInst, pin: str) -> Loc:
    parts = inst.conns.get(pin)
    if parts:
        return parts[0].loc
    return inst.loc


def _validate(modules: dict[str, ModuleDef], diags: list[Diagnostic]):
    for mod in modules.values():
        names: dict[str, Loc] = {}
        for d in mod.ports + mod.nets:
            if d.name in names:
                raise NetlistError(f"duplicate declaration of {d.name!r} in module {mod.name!r}", d.loc)
            names[d.name] = d.loc
        inst_names = set()
        for inst in mod.cells:
            if inst.name in inst_names:
                raise NetlistError(f"duplicate instance name {inst.name!r}", inst.loc)
            inst_names.add(inst.name)

        def resolve(expr: Expr):
            for part in expr:
                if isinstance(part, Const):
                    continue
                decl = mod.decl(part.name)
                if decl is None:
                    raise NetlistError(f"undeclared identifier {part.name!r}", part.loc)
                if part.msb is None:
                    part.msb, part.lsb = decl.msb, decl.lsb
                lo, hi = sorted((decl.msb, decl.lsb))
                for idx in (part.msb, part.lsb):
                    if not lo <= idx <= hi:
                        raise NetlistError(
                            f"bit index {idx} out of range for {part.name!r} [{decl.msb}:{decl.lsb}]", part.loc)
                if part.width > 1 and (part.msb >= part.lsb) != (decl.msb >= decl.lsb):
                    raise NetlistError(f"part-select of {part.name!r} reverses its declared direction", part.loc)

        for a in mod.assigns:
            resolve(a.lhs)
            resolve(a.rhs)
            if any(isinstance(p, Const) for p in a.lhs):
                raise NetlistError("constant on the left of assign", a.loc)
            if _expr_width(a.lhs) != _expr_width(a.rhs):
                raise NetlistError(
                    f"assign width mismatch: {_expr_width(a.lhs)} vs {_expr_width(a.rhs)}", a.loc)

        for inst in mod.cells:
            for expr in inst.conns.values():
                resolve(expr)
            if cells.is_primitive(inst.kind):
                _check_primitive(inst, diags)
            elif inst.kind in modules:
                child = modules[inst.kind]
                for pin, expr in inst.conns.items():
                    port = child.port(pin)
                    if port is None:
                        raise NetlistError(f"module {child.name!r} has no port {pin!r}", _pin_loc(inst, pin))
                    if expr and _expr_width(expr) != port.width:
                        raise NetlistError(
                            f"width mismatch on {inst.name}.{pin}: port is {port.width} bits, "
                            f"connection is {_expr_width(expr)}", _pin_loc(inst, pin))
                    if port.direction == "output" and any(isinstance(p, Const) for p in expr):
                        raise NetlistError(f"output {inst.name}.{pin} connected to a constant", _pin_loc(inst, pin))
                if inst.params:
                    raise NetlistError(f"parameters on module instance {inst.name!r} are not supported", inst.loc)
            elif cells.is_unsupported_block(inst.kind):
                raise NetlistError(
                    f"DSP and RAM primitives are not supported ({inst.kind!r}); "
                    "map them to LUTs and flip-flops first", inst.loc)
            else:
                raise NetlistError(f"unknown primitive kind {inst.kind!r}", inst.loc)


def _check_primitive(inst: CellInst, diags: list[Diagnostic]):
    kind = cells.get_kind(inst.kind)
    for pin, expr in inst.conns.items():
        if pin not in kind.pins:
            raise NetlistError(f"{kind.name} has no port {pin!r}", _pin_loc(inst, pin))
        if expr and _expr_width(expr) != 1:
            raise NetlistError(f"{inst.name}.{pin} must connect a single bit, got {_expr_width(expr)}",
                               _pin_loc(inst, pin))
        if pin in kind.outputs and any(isinstance(p, Const) for p in expr):
            raise NetlistError(f"output {inst.name}.{pin} connected to a constant", _pin_loc(inst, pin))
    for pname in list(inst.params):
        if pname not in kind.params:
            diags.append(Diagnostic("warning", f"parameter {pname} ignored on {kind.name} {inst.name!r}", inst.loc))
    k = kind.lut_size
    if k is not None:
        if "INIT" not in inst.params:
            raise NetlistError(f"{kind.name} {inst.name!r} requires an INIT parameter", inst.loc)
        if inst.params["INIT"] >> (1 << k):
            raise NetlistError(f"INIT {inst.params['INIT']:#x} does not fit {kind.name}", inst.loc)
    if kind.clocked and inst.params.get("INIT", 0) != 0:
        raise NetlistError(f"nonzero flip-flop INIT on {inst.name!r} is not supported", inst.loc)


def _expr_width(expr: Expr) -> int:
    return sum(p.width for p in expr)


def parse_netlist(source: str, top: str | None = None, filename: str = "<netlist>") -> Netlist:
    """Parse and validate netlist text.

    ``top`` defaults to the only module that no other module instantiates.
    """
    p = _Parser(source, filename)
    mods = p.parse()
    modules: dict[str, ModuleDef] = {}
    for m in mods:
        if m.name in modules:
            raise NetlistError(f"duplicate module {m.name!r}", m.loc)
        if cells.is_primitive(m.name):
            raise NetlistError(f"module {m.name!r} shadows a primitive", m.loc)
        modules[m.name] = m
    if not modules:
        raise NetlistError("no module found", Loc(filename, 1, 1))
    _validate(modules, p.diagnostics)
    if top is None:
        used = {c.kind for m in modules.values() for c in m.cells}
        roots = [n for n in modules if n not in used]
        if len(roots) != 1:
            raise NetlistError(
                f"cannot infer the top module (candidates: {', '.join(roots) or 'none'}); pass top explicitly",
                Loc(filename, 1, 1))
        top = roots[0]
    elif top not in modules:
        raise NetlistError(f"top module {top!r} not found", Loc(filename, 1, 1))
    return Netlist(modules, top, p.diagnostics)


# --------------------------------------------------------------------------
# printing

_SIMPLE_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")


def _id(name: str) -> str:
    if _SIMPLE_ID.match(name) and name not in KEYWORDS:
        return name
    return f"\\{name} "


def _range(msb: int, lsb: int) -> str:
    if msb == 0 and lsb == 0:
        return ""
    return f"[{msb}:{lsb}] "


def _fmt_expr(mod: ModuleDef, expr: Expr) -> str:
    parts = []
    for p in expr:
        if isinstance(p, Const):
            parts.append(f"{p.width}'h{p.value:x}")
            continue
        decl = mod.decl(p.name)
        if decl is not None and decl.msb == p.msb and decl.lsb == p.lsb:
            parts.append(_id(p.name))
        elif p.msb == p.lsb:
            parts.append(f"{_id(p.name)}[{p.msb}]")
        else:
            parts.append(f"{_id(p.name)}[{p.msb}:{p.lsb}]")
    if len(parts) == 1:
        return parts[0]
    return "{" + ", ".join(parts) + "}"


def _fmt_param(kind: str, value: int) -> str:
    k = cells.get_kind(kind).lut_size if cells.is_primitive(kind) else None
    width = (1 << k) if k else max(1, value.bit_length())
    return f"{width}'h{value:x}"


def format_netlist(netlist: Netlist) -> str:
    out = []
    for mod in netlist.modules.values():
        out.append(f"module {_id(mod.name)}({', '.join(_id(p.name) for p in mod.ports)});")
        for p in mod.ports:
            out.append(f"  {p.direction} {_range(p.msb, p.lsb)}{_id(p.name)};")
        for n in mod.nets:
            out.append(f"  wire {_range(n.msb, n.lsb)}{_id(n.name)};")
        for a in mod.assigns:
            out.append(f"  assign {_fmt_expr(mod, a.lhs)} = {_fmt_expr(mod, a.rhs)};")
        for c in mod.cells:
            params = ""
            if c.params:
                params = " #(" + ", ".join(
                    f".{k}({_fmt_param(c.kind, v)})" for k, v in c.params.items()) + ")"
            conns = ", ".join(f".{pin}({_fmt_expr(mod, e) if e else ''})" for pin, e in c.conns.items())
            out.append(f"  {_id(c.kind)}{params} {_id(c.name)} ({conns});")
        out.append("endmodule")
        out.append("")
    return "\n".join(out)


# --------------------------------------------------------------------------
# elaboration

CONST0, CONST1 = 0, 1


@dataclass
class FlatPort:
    name: str
    direction: str
    width: int
    bits: list[int]             # signal ids, least significant first
    msb: int = 0
    lsb: int = 0


@dataclass
class FlatCell:
    name: str
    kind: cells.PrimitiveKind
    params: dict[str, int]
    pins: dict[str, int]        # every pin of the kind -> signal id
    loc: Loc = field(default=NOLOC, compare=False, repr=False)

    @property
    def clocked(self) -> bool:
        return self.kind.clocked

    @property
    def lut(self) -> cells.LutSpec | None:
        k = self.kind.lut_size
        return None if k is None else cells.LutSpec(k, self.params["INIT"])

    def input_signals(self) -> list[tuple[str, int]]:
        return [(p, self.pins[p]) for p in self.kind.inputs]

    @property
    def out_signal(self) -> int:
        return self.pins[self.kind.output]


@dataclass
class FlatDesign:
    """A single-level design whose cells are all primitives.

    Signals are integers; 0 and 1 are the constants.  Every other signal has
    at most one driver: a top-level input bit or a cell output.
    """
    name: str
    ports: list[FlatPort]
    cells: list[FlatCell]
    signal_names: list[str]
    diagnostics: list[Diagnostic] = field(default_factory=list, compare=False, repr=False)

    @property
    def inputs(self) -> list[FlatPort]:
        return [p for p in self.ports if p.direction == "input"]

    @property
    def outputs(self) -> list[FlatPort]:
        return [p for p in self.ports if p.direction == "output"]

    def port(self, name: str) -> FlatPort:
        for p in self.ports:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def num_signals(self) -> int:
        return len(self.signal_names)


class _Flattener:
    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        self.names = ["1'b0", "1'b1"]
        self.parent = [0, 1]
        self.cells: list[FlatCell] = []
        self.aliases: list[tuple[int, int, Loc]] = []
        self.diags: list[Diagnostic] = list(netlist.diagnostics)

    def new_signal(self, name: str) -> int:
        self.names.append(name)
        self.parent.append(len(self.parent))
        return len(self.names) - 1

    def find(self, s: int) -> int:
        while self.parent[s] != s:
            self.parent[s] = self.parent[self.parent[s]]
            s = self.parent[s]
        return s

    def union(self, a: int, b: int, loc: Loc):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if ra <= CONST1 and rb <= CONST1:
            raise NetlistError("net tied to both constant 0 and constant 1", loc)
        if ra <= CONST1:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb

    def declare(self, prefix: str, name: str, msb: int, lsb: int) -> list[int]:
        width = abs(msb - lsb) + 1
        if msb == 0 and lsb == 0:
            return [self.new_signal(prefix + name)]
        step = 1 if msb >= lsb else -1
        return [self.new_signal(f"{prefix}{name}[{i}]") for i in range(lsb, msb + step, step)][:width]

    def inline(self, mod: ModuleDef, prefix: str, port_bits: dict[str, list[int]], stack: list[str]):
        table: dict[str, tuple[list[int], int, int]] = {}
        for p in mod.ports:
            table[p.name] = (port_bits[p.name], p.msb, p.lsb)
        for n in mod.nets:
            table[n.name] = (self.declare(prefix, n.name, n.msb, n.lsb), n.msb, n.lsb)

        def bits(expr: Expr) -> list[int]:
            out: list[int] = []
            for part in reversed(expr):
                if isinstance(part, Const):
                    out.extend(CONST1 if (part.value >> i) & 1 else CONST0 for i in range(part.width))
                    continue
                sigs, msb, lsb = table[part.name]
                for idx in part.indices():
                    out.append(sigs[abs(idx - lsb)])
            return out

        for a in mod.assigns:
            for l, r in zip(bits(a.lhs), bits(a.rhs)):
                self.union(l, r, a.loc)

        for inst in mod.cells:
            path = prefix + inst.name
            if cells.is_primitive(inst.kind):
                kind = cells.get_kind(inst.kind)
                pins = {}
                for pin in kind.inputs:
                    e = inst.conns.get(pin)
                    pins[pin] = bits(e)[0] if e else CONST0
                for pin in kind.outputs:
                    e = inst.conns.get(pin)
                    pins[pin] = bits(e)[0] if e else self.new_signal(f"{path}.{pin}")
                self.cells.append(FlatCell(path, kind, dict(inst.params), pins, inst.loc))
                continue
            child = self.netlist.modules[inst.kind]
            if inst.kind in stack:
                cycle = " -> ".join(stack[stack.index(inst.kind):] + [inst.kind])
                raise NetlistError(f"recursive module instantiation: {cycle}", inst.loc)
            child_bits = {}
            for p in child.ports:
                e = inst.conns.get(p.name)
                if e:
                    child_bits[p.name] = bits(e)
                elif p.direction == "input":
                    child_bits[p.name] = [CONST0] * p.width
                else:
                    child_bits[p.name] = self.declare(f"{path}.", p.name, p.msb, p.lsb)
            self.inline(child, path + ".", child_bits, stack + [inst.kind])

    def run(self) -> FlatDesign:
        top = self.netlist.top_module
        port_bits = {p.name: self.declare("", p.name, p.msb, p.lsb) for p in top.ports}
        self.inline(top, "", port_bits, [top.name])

        # drivers per alias class
        drivers: dict[int, list[str]] = {}
        locs: dict[int, Loc] = {}
        for p in top.ports:
            if p.direction == "input":
                for s in port_bits[p.name]:
                    drivers.setdefault(self.find(s), []).append(f"input {p.name}")
                    locs.setdefault(self.find(s), p.loc)
        for c in self.cells:
            for pin in c.kind.outputs:
                r = self.find(c.pins[pin])
                drivers.setdefault(r, []).append(f"{c.name}.{pin}")
                locs.setdefault(r, c.loc)
        for r, ds in drivers.items():
            if r <= CONST1:
                raise NetlistError(f"constant net driven by {ds[0]}", locs[r])
            if len(ds) > 1:
                raise NetlistError(f"multiple drivers on {self.names[r]}: {', '.join(ds)}", locs[r])

        # compact ids, rewrite floating consumers to constant 0
        remap = {CONST0: CONST0, CONST1: CONST1}
        names = ["1'b0", "1'b1"]

        def sig(s: int, consumer: str, loc: Loc) -> int:
            r = self.find(s)
            if r <= CONST1:
                return r
            if r not in drivers:
                self.diags.append(Diagnostic(
                    "warning", f"{self.names[r]} has no driver; {consumer} reads constant 0", loc))
                return CONST0
            if r not in remap:
                remap[r] = len(names)
                names.append(self.names[r])
            return remap[r]

        for p in top.ports:
            if p.direction == "input":
                for s in port_bits[p.name]:
                    r = self.find(s)
                    remap[r] = len(names)
                    names.append(self.names[r])
        ports = []
        for p in top.ports:
            if p.direction == "input":
                bits = [remap[self.find(s)] for s in port_bits[p.name]]
            else:
                bits = [sig(s, f"output {p.name}", p.loc) for s in port_bits[p.name]]
            ports.append(FlatPort(p.name, p.direction, p.width, bits, p.msb, p.lsb))
        flat_cells = []
        for c in self.cells:
            pins = {}
            for pin in c.kind.inputs:
                pins[pin] = sig(c.pins[pin], f"{c.name}.{pin}", c.loc)
            for pin in c.kind.outputs:
                r = self.find(c.pins[pin])
                if r not in remap:
                    remap[r] = len(names)
                    names.append(self.names[r])
                pins[pin] = remap[r]
            flat_cells.append(FlatCell(c.name, c.kind, c.params, pins, c.loc))
        return FlatDesign(top.name, ports, flat_cells, names, self.diags)


def elaborate(netlist: Netlist, top: str | None = None) -> FlatDesign:
    """Flatten the hierarchy under ``top`` into primitive cells.

    Instance paths are joined with ``.``; nets inside a submodule instance
    ``u`` are named ``u.net``.
    """
    if top is not None and top != netlist.top:
        if top not in netlist.modules:
            raise NetlistError(f"top module {top!r} not found")
        netlist = Netlist(netlist.modules, top, netlist.diagnostics)
    return _Flattener(netlist).run()


def load_design(source: str, top: str | None = None, filename: str = "<netlist>") -> FlatDesign:
    return elaborate(parse_netlist(source, top, filename))
