"""The compilation pipeline from netlist text to a final schedule."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .graph import CutEntry, Dfg, build_dfg, cycle_removal
from .netlist import FlatDesign, elaborate, parse_netlist
from .schedule import AsapSchedule, FinalSchedule, asap_schedule, schedule_fixup


@dataclass
class Compiled:
    design: FlatDesign
    dfg: Dfg
    acyclic: Dfg
    cuts: dict[int, list[CutEntry]]
    asap: AsapSchedule
    schedule: FinalSchedule

    @property
    def name(self) -> str:
        return self.design.name


def compile_design(design: FlatDesign) -> Compiled:
    g = build_dfg(design)
    acyclic, cuts = cycle_removal(g)
    asap = asap_schedule(acyclic)
    return Compiled(design, g, acyclic, cuts, asap, schedule_fixup(asap, cuts, g))


def compile_source(source: str, top: str | None = None, filename: str = "<netlist>") -> Compiled:
    return compile_design(elaborate(parse_netlist(source, top, filename)))


def compile_file(path: str | Path, top: str | None = None) -> Compiled:
    path = Path(path)
    return compile_source(path.read_text(encoding="utf-8"), top, str(path))
