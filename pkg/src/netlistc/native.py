"""Build the emitted C (or LLVM text) with a host compiler and replay vectors
through the resulting binary."""

from __future__ import annotations

import shutil
import subprocess
from pathlib import Path

import numpy as np

from . import codegen
from .compiler import Compiled
from .vectors import Transcript, VectorSet, _apply_expectations

__all__ = ["NativeError", "STRICT_CFLAGS", "find_compiler", "build_native", "run_native"]

STRICT_CFLAGS = ["-std=c99", "-Wall", "-Wextra", "-pedantic", "-Werror", "-O1"]


class NativeError(RuntimeError):
    pass


def find_compiler(names=("cc", "gcc", "clang")) -> str | None:
    for n in names:
        path = shutil.which(n)
        if path:
            return path
    return None


def build_native(compiled: Compiled, workdir: str | Path, via: str = "c", cc: str | None = None) -> Path:
    """Write sources into ``workdir`` and link a vector-replay executable.

    ``via="c"`` compiles the C99 translation with strict warnings as errors;
    ``via="ll"`` assembles the LLVM text with clang instead.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    name = compiled.name
    ir = codegen.emit_ir(compiled)
    (workdir / f"{name}.h").write_text(codegen.emit_header(ir).text, encoding="utf-8")
    (workdir / "harness.c").write_text(codegen.emit_c_harness(compiled.design, f"{name}.h"), encoding="utf-8")
    exe = workdir / f"{name}_{via}"
    if via == "c":
        cc = cc or find_compiler()
        if cc is None:
            raise NativeError("no C compiler found")
        (workdir / f"{name}.c").write_text(
            codegen.emit_c_source(compiled.schedule, compiled.design), encoding="utf-8")
        cmd = [cc, *STRICT_CFLAGS, "-o", str(exe), str(workdir / "harness.c"), str(workdir / f"{name}.c")]
    elif via == "ll":
        cc = cc or shutil.which("clang")
        if cc is None:
            raise NativeError("clang not found")
        (workdir / f"{name}.ll").write_text(ir.text, encoding="utf-8")
        cmd = [cc, "-O1", "-Wno-override-module", "-o", str(exe),
               str(workdir / "harness.c"), str(workdir / f"{name}.ll")]
    else:
        raise ValueError(f"unknown backend {via!r}")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise NativeError(f"{' '.join(cmd)} failed:\n{proc.stderr}")
    return exe


def run_native(exe: str | Path, compiled: Compiled, vs: VectorSet) -> Transcript:
    design = compiled.design
    vs.check(design)
    order = [vs.inputs.index(p.name) for p in design.inputs]
    case = vs.case if vs.case is not None else np.zeros(len(vs), dtype=np.int64)
    table = np.column_stack([case.astype(np.uint64), vs.stimulus[:, order]]) if order else \
        case.astype(np.uint64)[:, None]
    text = "\n".join(" ".join(map(str, row)) for row in table.tolist()) + "\n"
    proc = subprocess.run([str(exe)], input=text, capture_output=True, text=True)
    if proc.returncode != 0:
        raise NativeError(f"{exe} exited with {proc.returncode}: {proc.stderr}")
    outs = design.outputs
    lines = proc.stdout.splitlines()
    if len(lines) != len(vs):
        raise NativeError(f"{exe} printed {len(lines)} rows for {len(vs)} inputs")
    if outs:
        values = np.array([[int(v) for v in ln.split()] for ln in lines], dtype=np.uint64)
    else:
        values = np.zeros((len(vs), 0), dtype=np.uint64)
    t = Transcript([p.name for p in outs], values.reshape(len(vs), len(outs)), vs.case)
    return _apply_expectations(t, vs)
