"""Bit-level dataflow graph, strongly connected components and feedback cutting."""

from __future__ import annotations

from dataclasses import dataclass, field

from .netlist import CONST1, FlatDesign

__all__ = [
    "Vertex", "Edge", "Dfg", "SccPartition", "CutEntry", "CombinationalLoop",
    "build_dfg", "tarjan_scc", "cycle_removal", "find_cycle", "topological_order",
    "to_dot", "format_scc",
]

# pins whose in-SCC edges are never cut: Q depends on them without a clock edge
UNCUT_PINS = frozenset({"C", "CLR"})


class CombinationalLoop(Exception):
    """A feedback loop with no flip-flop to break it."""

    def __init__(self, cycle: list[str], reason: str = "combinational loop"):
        self.cycle = cycle
        super().__init__(f"{reason}: {' -> '.join(cycle + cycle[:1])}")


@dataclass(frozen=True)
class Vertex:
    id: int
    name: str
    kind: str               # "input", "output", or a primitive kind name
    clocked: bool = False
    cell: int | None = None  # index into FlatDesign.cells
    port: int | None = None  # index into FlatDesign.ports


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    pin: str                # consuming pin, or "name[i]" for an output-port bit
    signal: int = -1
    label: str = ""


@dataclass
class Dfg:
    vertices: list[Vertex]
    edges: list[Edge]
    _in: list[list[Edge]] | None = field(default=None, repr=False, compare=False)
    _out: list[list[Edge]] | None = field(default=None, repr=False, compare=False)

    def _index(self):
        self._in = [[] for _ in self.vertices]
        self._out = [[] for _ in self.vertices]
        for e in self.edges:
            self._out[e.src].append(e)
            self._in[e.dst].append(e)

    def in_edges(self, v: int) -> list[Edge]:
        if self._in is None:
            self._index()
        return self._in[v]

    def out_edges(self, v: int) -> list[Edge]:
        if self._out is None:
            self._index()
        return self._out[v]

    def successors(self, v: int) -> list[int]:
        return [e.dst for e in self.out_edges(v)]

    def without(self, removed) -> Dfg:
        removed = set(removed)
        return Dfg(self.vertices, [e for e in self.edges if e not in removed])

    def with_edges(self, extra) -> Dfg:
        return Dfg(self.vertices, self.edges + list(extra))

    def vertex_by_name(self, name: str) -> Vertex:
        for v in self.vertices:
            if v.name == name:
                return v
        raise KeyError(name)


def build_dfg(design: FlatDesign) -> Dfg:
    """One vertex per top-level port and per cell; one edge per driven bit
    feeding a consuming pin.  Constants produce no edges."""
    vertices: list[Vertex] = []
    driver: dict[int, int] = {}
    for pi, port in enumerate(design.ports):
        v = Vertex(len(vertices), port.name, port.direction, port=pi)
        vertices.append(v)
        if port.direction == "input":
            for s in port.bits:
                driver[s] = v.id
    cell_vertex = []
    for ci, cell in enumerate(design.cells):
        v = Vertex(len(vertices), cell.name, cell.kind.name, cell.clocked, cell=ci)
        vertices.append(v)
        cell_vertex.append(v.id)
        for pin in cell.kind.outputs:
            s = cell.pins[pin]
            if s in driver:
                raise ValueError(f"signal {design.signal_names[s]} has two drivers")
            driver[s] = v.id

    edges = []
    for ci, cell in enumerate(design.cells):
        for pin, s in cell.input_signals():
            if s <= CONST1:
                continue
            edges.append(Edge(driver[s], cell_vertex[ci], pin, s, design.signal_names[s]))
    for pi, port in enumerate(design.ports):
        if port.direction != "output":
            continue
        for i, s in enumerate(port.bits):
            if s <= CONST1:
                continue
            idx = port.lsb + i if port.msb >= port.lsb else port.lsb - i
            pin = port.name if port.width == 1 and port.msb == port.lsb == 0 else f"{port.name}[{idx}]"
            edges.append(Edge(driver[s], pi, pin, s, design.signal_names[s]))
    return Dfg(vertices, edges)


@dataclass
class SccPartition:
    components: list[list[int]]     # reverse topological order of the condensation
    index: list[int]                # component index per vertex

    def nontrivial(self, g: Dfg) -> list[list[int]]:
        out = []
        for comp in self.components:
            if len(comp) > 1 or any(e.dst == comp[0] for e in g.out_edges(comp[0])):
                out.append(comp)
        return out


def tarjan_scc(g: Dfg) -> SccPartition:
    """Tarjan's algorithm, iterative so deep netlists do not hit the
    recursion limit.  Components come out sinks first."""
    n = len(g.vertices)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            succ = g.out_edges(v)
            if i < len(succ):
                work[-1] = (v, i + 1)
                w = succ[i].dst
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))

    comp_index = [0] * n
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_index[v] = ci
    return SccPartition(comps, comp_index)


def find_cycle(g: Dfg, within: set[int] | None = None) -> list[int] | None:
    """Return one directed cycle as a vertex list, or None."""
    n = len(g.vertices)
    color = [0] * n
    parent = [-1] * n
    for root in range(n):
        if color[root] or (within is not None and root not in within):
            continue
        work = [(root, 0)]
        color[root] = 1
        while work:
            v, i = work[-1]
            succ = g.out_edges(v)
            if i < len(succ):
                work[-1] = (v, i + 1)
                w = succ[i].dst
                if within is not None and w not in within:
                    continue
                if color[w] == 1:
                    cycle = [v]
                    while cycle[-1] != w:
                        cycle.append(parent[cycle[-1]])
                    return cycle[::-1]
                if color[w] == 0:
                    color[w] = 1
                    parent[w] = v
                    work.append((w, 0))
                continue
            color[v] = 2
            work.pop()
    return None


def topological_order(g: Dfg) -> list[int] | None:
    """Kahn's algorithm with declaration order as tie-break; None if cyclic."""
    import heapq
    indeg = [len(g.in_edges(v.id)) for v in g.vertices]
    ready = [v for v in range(len(indeg)) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for e in g.out_edges(v):
            indeg[e.dst] -= 1
            if indeg[e.dst] == 0:
                heapq.heappush(ready, e.dst)
    return order if len(order) == len(indeg) else None


@dataclass(frozen=True)
class CutEntry:
    driver: int
    pin: str
    edge: Edge


def cycle_removal(g: Dfg) -> tuple[Dfg, dict[int, list[CutEntry]]]:
    """Cut sequential feedback at flip-flop inputs.

    Every SCC with a cycle must contain a flip-flop, otherwise
    :class:`CombinationalLoop` is raised with a witness.  For each flip-flop
    in such an SCC, every in-edge from the same SCC is removed and recorded.
    Clock and asynchronous-clear pins are never cut; a cycle that survives
    through them is reported as a loop as well.
    """
    scc = tarjan_scc(g)
    loops = scc.nontrivial(g)
    for comp in loops:
        if not any(g.vertices[v].clocked for v in comp):
            cycle = find_cycle(g, set(comp))
            raise CombinationalLoop([g.vertices[v].name for v in cycle])

    cuts: dict[int, list[CutEntry]] = {}
    removed = set()
    for comp in sorted(loops, key=min):
        members = set(comp)
        for v in comp:
            if not g.vertices[v].clocked:
                continue
            for e in g.in_edges(v):
                if e.src in members and e.pin not in UNCUT_PINS:
                    cuts.setdefault(v, []).append(CutEntry(e.src, e.pin, e))
                    removed.add(e)
    cut = g.without(removed)
    if loops:
        cycle = find_cycle(cut)
        if cycle is not None:
            raise CombinationalLoop([g.vertices[v].name for v in cycle],
                                    "loop through a clock or asynchronous-clear pin")
    return cut, dict(sorted(cuts.items()))


def to_dot(g: Dfg, scc: SccPartition | None = None, name: str = "dfg") -> str:
    """Graphviz text, one statement per line."""
    lines = [f'digraph "{name}" {{']
    for v in g.vertices:
        extra = f', comment="scc {scc.index[v.id]}"' if scc else ""
        lines.append(f'  v{v.id} [label="{v.name}\\n{v.kind}"{extra}];')
    for e in g.edges:
        lines.append(f'  v{e.src} -> v{e.dst} [label="{e.pin}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_scc(g: Dfg, scc: SccPartition) -> str:
    lines = []
    for i, comp in enumerate(scc.components):
        lines.append(f"{i}\t" + " ".join(g.vertices[v].name for v in comp))
    return "\n".join(lines) + "\n"
