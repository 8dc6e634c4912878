"""ASAP serialisation of the cut DFG and flip-flop reinsertion."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .graph import CutEntry, Dfg, topological_order

__all__ = [
    "SchedulingError", "AsapSchedule", "SlotMode", "Slot", "FinalSchedule",
    "asap_schedule", "schedule_fixup", "format_schedule",
]


class SchedulingError(Exception):
    pass


@dataclass
class AsapSchedule:
    start: list[int]        # start step per vertex (ports included)
    slots: list[int]        # cell vertices by (start, declaration order)


def asap_schedule(g: Dfg) -> AsapSchedule:
    """Minimal solution of ``start(v) - start(u) >= 1`` for every edge.

    Longest path from the sources in topological order gives the least
    feasible start time of each vertex, which is exactly the optimum of the
    difference-constraint system for unit latencies.
    """
    order = topological_order(g)
    if order is None:
        raise SchedulingError("dataflow graph has a cycle; run cycle_removal first")
    start = [0] * len(g.vertices)
    for v in order:
        t = start[v] + 1
        for e in g.out_edges(v):
            if start[e.dst] < t:
                start[e.dst] = t
    cells = [v.id for v in g.vertices if v.cell is not None]
    cells.sort(key=lambda v: (start[v], v))
    return AsapSchedule(start, cells)


class SlotMode(enum.Enum):
    NORMAL = "normal"
    COPY = "clock-disabled-copy"
    ORIGINAL = "reinserted-original"


@dataclass(frozen=True)
class Slot:
    vertex: int
    cell: int
    name: str
    mode: SlotMode
    start: int


@dataclass
class FinalSchedule:
    slots: list[Slot]
    cuts: dict[int, list[CutEntry]]

    def __iter__(self):
        return iter(self.slots)

    def __len__(self):
        return len(self.slots)

    def order(self) -> list[str]:
        return [s.name for s in self.slots]


def schedule_fixup(s: AsapSchedule, r: dict[int, list[CutEntry]], g_original: Dfg) -> FinalSchedule:
    """Turn each cut flip-flop into a clock-disabled copy at its ASAP slot and
    reinsert the original just after the latest start among all of its
    original drivers.

    The reinsertion point is never earlier than the copy's own step, so the
    copy always reads the stored value before the original updates it.
    """
    scheduled = set(s.slots)
    for v in r:
        if v not in scheduled:
            raise SchedulingError(f"cut flip-flop {g_original.vertices[v].name} is not scheduled")
    keyed = []
    for v in s.slots:
        vert = g_original.vertices[v]
        mode = SlotMode.COPY if v in r else SlotMode.NORMAL
        keyed.append(((s.start[v], 0, v), Slot(v, vert.cell, vert.name, mode, s.start[v])))
    for v in r:
        vert = g_original.vertices[v]
        drivers = {e.src for e in g_original.in_edges(v)}
        for d in drivers:
            dv = g_original.vertices[d]
            if dv.cell is not None and d not in scheduled:
                raise SchedulingError(f"driver {dv.name} of {vert.name} is not scheduled")
        latest = max((s.start[d] for d in drivers), default=0)
        t = max(latest, s.start[v])
        keyed.append(((t, 1, v), Slot(v, vert.cell, vert.name, SlotMode.ORIGINAL, t)))
    keyed.sort(key=lambda kv: kv[0])
    return FinalSchedule([slot for _, slot in keyed], r)


def format_schedule(fs: FinalSchedule) -> str:
    lines = ["index\tinstance\tmode\tstart"]
    for i, slot in enumerate(fs.slots):
        lines.append(f"{i}\t{slot.name}\t{slot.mode.value}\t{slot.start}")
    return "\n".join(lines) + "\n"
