"""Command-line driver: compile, sim, check, dump.

Exit codes: 0 success; 1 parse/semantic error, failed expectation or
divergence; 2 combinational loop; 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import tempfile
from pathlib import Path

from . import benchmarks, codegen
from .compiler import Compiled, compile_design, compile_source
from .graph import CombinationalLoop, format_scc, tarjan_scc, to_dot
from .fuzz import random_netlist, random_vectors
from .native import NativeError, build_native, run_native
from .netlist import NetlistError, load_design
from .schedule import format_schedule
from .sim import CompiledSim, ConvergenceError, EventSim
from .vectors import Transcript, VectorError, VectorSet, diff_transcripts, read_vectors, run_vectors

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("netlistc")

EXIT_OK, EXIT_ERROR, EXIT_LOOP, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- helpers

def _load(args) -> tuple[Compiled, str]:
    """Compile the design named by ``--bench`` or the positional netlist."""
    if getattr(args, "bench", None):
        b = benchmarks.get(args.bench)
        source, filename, top = b.source(), b.netlist, args.top or b.top
    else:
        if not args.netlist:
            raise CliError("no netlist given (pass a .v file or --bench NAME)")
        path = Path(args.netlist)
        try:
            source = path.read_text(encoding="utf-8")
        except OSError as e:
            raise CliError(f"{path}: {e.strerror or e}", EXIT_IO) from None
        except UnicodeDecodeError as e:
            raise CliError(f"{path}: not UTF-8 text ({e.reason})", EXIT_IO) from None
        filename, top = str(path), args.top
    design = load_design(source, top, filename)
    for d in design.diagnostics:
        print(d, file=sys.stderr)
    return compile_design(design), filename


def _vectors(args, compiled: Compiled) -> VectorSet:
    if args.vectors:
        try:
            return read_vectors(args.vectors)
        except OSError as e:
            raise CliError(f"{args.vectors}: {e.strerror or e}", EXIT_IO) from None
    if getattr(args, "bench", None):
        b = benchmarks.get(args.bench)
        if args.sample is None and not args.full and not args.generate:
            return b.bundled_vectors()
        return b.vectors(args.sample, args.seed, args.full)
    raise CliError("no vectors: pass --vectors FILE (or --bench NAME)")


def _engine(kind: str, compiled: Compiled):
    if kind == "compiled":
        return lambda lanes: CompiledSim(compiled, lanes)
    if kind == "oracle":
        return lambda lanes: EventSim(compiled.design, lanes)
    raise CliError(f"unknown engine {kind!r}")


def _emit_transcript(t: Transcript, out: str | None):
    if out:
        try:
            with open(out, "w", newline="", encoding="utf-8") as f:
                t.write_csv(f)
        except OSError as e:
            raise CliError(f"{out}: {e.strerror or e}", EXIT_IO) from None
    else:
        t.write_csv(sys.stdout)


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise CliError(f"{path}: {e.strerror or e}", EXIT_IO) from None
    log.info("wrote %s", path)


def _dumps(args, compiled: Compiled, outdir: Path | None):
    name = compiled.name
    if args.dump_dfg:
        text = to_dot(compiled.dfg, tarjan_scc(compiled.dfg), name)
        if outdir:
            _write(outdir / f"{name}.dot", text)
        else:
            sys.stdout.write(text)
    if getattr(args, "dump_scc", False):
        text = format_scc(compiled.dfg, tarjan_scc(compiled.dfg))
        if outdir:
            _write(outdir / f"{name}.scc", text)
        else:
            sys.stdout.write(text)
    if args.dump_schedule:
        text = format_schedule(compiled.schedule)
        if outdir:
            _write(outdir / f"{name}.schedule.tsv", text)
        else:
            sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_compile(args) -> int:
    compiled, filename = _load(args)
    outdir = Path(args.out or ".")
    ir = codegen.emit_ir(compiled, Path(filename).name)
    _write(outdir / f"{compiled.name}.ll", ir.text)
    _write(outdir / f"{compiled.name}.h", codegen.emit_header(ir).text)
    if args.emit_c:
        _write(outdir / f"{compiled.name}.c", codegen.emit_c_source(compiled.schedule, compiled.design))
    _dumps(args, compiled, outdir)
    return EXIT_OK


def cmd_sim(args) -> int:
    compiled, _ = _load(args)
    vs = _vectors(args, compiled)
    t = run_vectors(_engine(args.engine, compiled), compiled.design, vs)
    _emit_transcript(t, args.out)
    if t.has_verdicts:
        print(t.verdict(), file=sys.stderr)
        print(t.summary(), file=sys.stderr)
        return EXIT_OK if t.failed == 0 else EXIT_ERROR
    return EXIT_OK


def _reproducer(vs: VectorSet, row: int) -> str:
    lo = row
    if vs.case is not None:
        while lo > 0 and vs.case[lo - 1] == vs.case[row]:
            lo -= 1
    else:
        lo = 0
    lines = [",".join(vs.inputs)]
    for r in range(lo, row + 1):
        lines.append(",".join(str(int(v)) for v in vs.stimulus[r]))
    return "\n".join(lines)


def _check_one(label: str, compiled: Compiled, vs: VectorSet, native: bool) -> bool:
    ref = run_vectors(_engine("oracle", compiled), compiled.design, vs)
    got = run_vectors(_engine("compiled", compiled), compiled.design, vs)
    sides = [("compiled", got)]
    if native:
        with tempfile.TemporaryDirectory() as tmp:
            exe = build_native(compiled, tmp)
            sides.append(("native-c", run_native(exe, compiled, vs)))
    ok = True
    for side, t in sides:
        d = diff_transcripts(t, ref)
        if d is not None:
            ok = False
            print(f"{label}: {side} vs oracle: {d}")
            print("reproducer (rows from reset up to the divergent pass):")
            print(_reproducer(vs, d.row))
    verdict = ""
    if got.has_verdicts:
        verdict = f", expectations {got.verdict()}"
        ok = ok and got.failed == 0
    if ok:
        print(f"{label}: {len(vs)} passes agree{verdict}")
    else:
        print(f"{label}: FAILED{verdict}")
    print(f"RESULT pass={got.passed if got.has_verdicts else int(ok)} "
          f"fail={got.failed if got.has_verdicts else int(not ok)}")
    return ok


def cmd_check(args) -> int:
    if args.fuzz:
        src = random_netlist(args.seed, n_cells=args.cells)
        if args.out:
            _write(Path(args.out), src)
        compiled = compile_source(src, filename=f"<fuzz seed {args.seed}>")
        vs = random_vectors(compiled.design, 32, args.seed, cases=16)
        return EXIT_OK if _check_one(f"fuzz seed {args.seed}", compiled, vs, args.native) else EXIT_ERROR
    if args.all:
        ok = True
        for name in benchmarks.names():
            args.bench = name
            compiled, _ = _load(args)
            ok &= _check_one(name, compiled, _vectors(args, compiled), args.native)
        return EXIT_OK if ok else EXIT_ERROR
    compiled, filename = _load(args)
    return EXIT_OK if _check_one(args.bench or filename, compiled, _vectors(args, compiled),
                                 args.native) else EXIT_ERROR


def cmd_dump(args) -> int:
    compiled, _ = _load(args)
    if not (args.dump_dfg or args.dump_scc or args.dump_schedule):
        args.dump_schedule = True
    _dumps(args, compiled, Path(args.out) if args.out else None)
    return EXIT_OK


def cmd_list(args) -> int:
    for b in benchmarks.BENCHMARKS.values():
        print(f"{b.name}\t{b.category}\t{b.top}\t{b.netlist}\t{b.vectors_file}")
    return EXIT_OK


# ---------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netlistc", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="TOML file supplying defaults for subcommand flags")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, vectors=False):
        sp.add_argument("netlist", nargs="?", help="structural Verilog file")
        sp.add_argument("--top", help="top module (default: the only uninstantiated module)")
        sp.add_argument("--bench", help="use a bundled benchmark instead of a file")
        sp.add_argument("-o", "--out", help="output directory (compile/dump) or file (sim)")
        if vectors:
            sp.add_argument("--vectors", help="stimulus CSV")
            sp.add_argument("--sample", type=int, help="generate N sampled benchmark cases")
            sp.add_argument("--seed", type=int, default=0, help="sampling / fuzz seed")
            sp.add_argument("--full", action="store_true", help="full-scale benchmark case count")
            sp.add_argument("--generate", action="store_true",
                            help="generate the default benchmark cases instead of the bundled CSV")

    c = sub.add_parser("compile", help="emit .ll and .h (and .c)")
    common(c)
    c.add_argument("--emit-c", action="store_true")
    c.add_argument("--dump-schedule", action="store_true")
    c.add_argument("--dump-dfg", action="store_true")
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("sim", help="run vectors on the compiled schedule")
    common(s, vectors=True)
    s.add_argument("--engine", choices=["compiled", "oracle"], default="compiled")
    s.set_defaults(func=cmd_sim)

    k = sub.add_parser("check", help="compare the compiled schedule against the event-driven oracle")
    common(k, vectors=True)
    k.add_argument("--all", action="store_true", help="every bundled benchmark")
    k.add_argument("--fuzz", action="store_true", help="random netlist from --seed")
    k.add_argument("--cells", type=int, default=30, help="cells per fuzz netlist")
    k.add_argument("--native", action="store_true", help="also build and run the C backend")
    k.set_defaults(func=cmd_check)

    d = sub.add_parser("dump", help="DFG, SCC and schedule debug output")
    common(d)
    d.add_argument("--dump-schedule", action="store_true")
    d.add_argument("--dump-dfg", action="store_true")
    d.add_argument("--dump-scc", action="store_true")
    d.set_defaults(func=cmd_dump)

    ls = sub.add_parser("list", help="list bundled benchmarks")
    ls.set_defaults(func=cmd_list)
    return p


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise CliError(f"{path}: {e.strerror or e}", EXIT_IO) from None
    except tomllib.TOMLDecodeError as e:
        raise CliError(f"{path}: {e}") from None
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_args(argv: list[str] | None, parser: argparse.ArgumentParser | None = None):
    """Flags override config values, which override built-in defaults."""
    parser = parser or build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    if args.config:
        conf = load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions if a.dest != "help"}
        given = {tok.split("=", 1)[0] for tok in argv if tok.startswith("-")}
        for key, value in conf.items():
            if key not in known:
                raise CliError(f"{args.config}: unknown key {key!r} for {args.command}")
            opts = known[key].option_strings
            explicit = given.intersection(opts) if opts else getattr(args, key) is not None
            if not explicit:
                setattr(args, key, value)
    return args


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(name)s: %(message)s")
        return args.func(args)
    except CliError as e:
        print(f"netlistc: error: {e}", file=sys.stderr)
        return e.code
    except NetlistError as e:
        print(e, file=sys.stderr)
        return EXIT_ERROR
    except CombinationalLoop as e:
        print(f"netlistc: error: {e}", file=sys.stderr)
        return EXIT_LOOP
    except (VectorError, codegen.CodegenError, ConvergenceError, NativeError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"netlistc: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
