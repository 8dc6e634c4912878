"""Independent oracles shared by the test modules."""

import random

import numpy as np

from netlistc.graph import Dfg, Edge, Vertex
from netlistc.schedule import SlotMode


def random_dfg(seed: int, max_vertices: int = 30) -> Dfg:
    """Random digraph with some clocked vertices; pins include C and CLR."""
    rng = random.Random(seed)
    n = rng.randint(1, max_vertices)
    density = rng.uniform(0.01, 0.12)
    verts = []
    for i in range(n):
        clocked = rng.random() < 0.4
        verts.append(Vertex(i, f"v{i}", "FDCE" if clocked else "LUT4", clocked, cell=i))
    edges = []
    for u in range(n):
        for v in range(n):
            if rng.random() < density:
                pin = rng.choice(["D"] * 6 + ["CE", "R", "C", "CLR"]) if verts[v].clocked else f"I{rng.randint(0, 3)}"
                edges.append(Edge(u, v, pin))
    return Dfg(verts, edges)


def reachability(g: Dfg) -> np.ndarray:
    n = len(g.vertices)
    r = np.eye(n, dtype=bool)
    for e in g.edges:
        r[e.src, e.dst] = True
    for k in range(n):
        r |= r[:, k:k + 1] & r[k:k + 1, :]
    return r


def brute_force_scc(g: Dfg) -> set[frozenset[int]]:
    r = reachability(g)
    mutual = r & r.T
    return {frozenset(np.flatnonzero(mutual[v]).tolist()) for v in range(len(g.vertices))}


def is_topo_sortable(g: Dfg) -> bool:
    n = len(g.vertices)
    indeg = [0] * n
    for e in g.edges:
        indeg[e.dst] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for e in g.edges:
            if e.src == v:
                indeg[e.dst] -= 1
                if indeg[e.dst] == 0:
                    ready.append(e.dst)
    return seen == n


def schedule_violations(compiled) -> list[str]:
    """Check the three ordering rules on a final schedule.

    A vertex's value is produced by its NORMAL or COPY slot.  Every slot of a
    consumer must follow the producing slot of each driver along an uncut
    edge; a cut flip-flop's COPY precedes its ORIGINAL; and the ORIGINAL
    follows the producing slot of every driver in the uncut graph.
    """
    g = compiled.dfg
    pos_value: dict[int, int] = {}
    pos_all: dict[int, list[int]] = {}
    pos_orig: dict[int, int] = {}
    for i, slot in enumerate(compiled.schedule.slots):
        pos_all.setdefault(slot.vertex, []).append(i)
        if slot.mode is SlotMode.ORIGINAL:
            pos_orig[slot.vertex] = i
        else:
            pos_value[slot.vertex] = i
    bad = []
    for e in compiled.acyclic.edges:
        if e.src not in pos_value or e.dst not in pos_all:
            continue
        for p in pos_all[e.dst]:
            if pos_value[e.src] >= p:
                bad.append(f"producer-before-consumer {g.vertices[e.src].name} -> {g.vertices[e.dst].name}")
    for v, p in pos_orig.items():
        if pos_value[v] >= p:
            bad.append(f"copy-before-original {g.vertices[v].name}")
        for e in g.in_edges(v):
            if e.src in pos_value and e.src != v and pos_value[e.src] > p:
                bad.append(f"original-after-latest-driver {g.vertices[v].name} <- {g.vertices[e.src].name}")
    return bad


def run_i1_function(text: str, args: dict[str, int], m: int, memory: dict[str, int] | None = None) -> int:
    """Interpret one emitted primitive function over lane masks.

    Covers the instruction subset the primitives use: xor, and, or, select,
    load, store and ret on i1 values.
    """
    env = dict(args)
    mem = memory if memory is not None else {}

    def val(tok: str) -> int:
        tok = tok.strip().removeprefix("i1 ").strip()
        if tok == "true":
            return m
        if tok == "false":
            return 0
        return env[tok]

    for raw in text.splitlines():
        line = raw.split(";")[0].strip()
        if not line or line.endswith(":") or line.startswith("define") or line == "}":
            continue
        if line.startswith("ret "):
            return val(line[4:])
        if line.startswith("store "):
            v, ptr = line[6:].split(",")
            mem[ptr.strip().removeprefix("i1* ")] = val(v)
            continue
        dst, rhs = (s.strip() for s in line.split("=", 1))
        op, rest = rhs.split(" ", 1)
        if op == "load":
            env[dst] = mem.get(rest.split(",")[1].strip().removeprefix("i1* "), 0)
            continue
        ops = [x.strip() for x in rest.removeprefix("i1 ").split(",")]
        if op == "select":
            c, a, b = (val(x) for x in ops)
            env[dst] = (c & a) | ((c ^ m) & b)
        elif op in ("xor", "and", "or"):
            a, b = val(ops[0]), val(ops[1])
            env[dst] = {"xor": a ^ b, "and": a & b, "or": a | b}[op]
        else:
            raise ValueError(f"unsupported instruction: {line}")
    raise ValueError("function has no ret")
