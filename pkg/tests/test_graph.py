import pytest

from netlistc.graph import (
    CombinationalLoop, Dfg, Edge, Vertex, build_dfg, cycle_removal, find_cycle, format_scc, tarjan_scc,
    to_dot, topological_order,
)
from netlistc.netlist import load_design

from conftest import DFF_CHAIN, LOGIC_DFG, REG_AND, RING, SELF_LOOP
from helpers import brute_force_scc, is_topo_sortable, random_dfg


def _graph(n, edges, clocked=()):
    verts = [Vertex(i, f"v{i}", "FD" if i in clocked else "AND2", i in clocked, cell=i) for i in range(n)]
    return Dfg(verts, [Edge(u, v, p) for u, v, p in edges])


def test_logic_dfg_shape():
    g = build_dfg(load_design(LOGIC_DFG))
    assert len(g.vertices) == 7
    assert len(g.edges) == 7
    names = {(g.vertices[e.src].name, g.vertices[e.dst].name) for e in g.edges}
    assert ("a", "xor") in names and ("inv", "and") in names and ("c", "or") in names


def test_reg_and_dfg():
    g = build_dfg(load_design(REG_AND))
    pins = sorted((g.vertices[e.src].name, g.vertices[e.dst].name, e.pin) for e in g.edges)
    assert pins == [("a", "inv", "I"), ("b", "fdr", "D"), ("clk", "fdr", "C"),
                    ("fdr", "out", "out"), ("inv", "fdr", "R")]


@pytest.mark.parametrize("seed", range(200))
def test_tarjan_matches_brute_force(seed):
    g = random_dfg(seed, max_vertices=12)
    got = {frozenset(c) for c in tarjan_scc(g).components}
    assert got == brute_force_scc(g)


def test_tarjan_components_sinks_first():
    g = _graph(3, [(0, 1, "I0"), (1, 2, "I0")])
    assert tarjan_scc(g).components == [[2], [1], [0]]


def test_tarjan_deep_chain_no_recursion_limit():
    n = 5000
    g = _graph(n, [(i, i + 1, "I0") for i in range(n - 1)])
    assert len(tarjan_scc(g).components) == n


def test_cycle_removal_cuts_ff_inputs():
    # v0 (FD) -> v1 -> v2 -> v0
    g = _graph(3, [(0, 1, "I0"), (1, 2, "I0"), (2, 0, "D")], clocked={0})
    cut, r = cycle_removal(g)
    assert list(r) == [0]
    assert [c.driver for c in r[0]] == [2]
    assert topological_order(cut) is not None


def test_self_loop_ff_is_cut():
    g = _graph(1, [(0, 0, "D")], clocked={0})
    cut, r = cycle_removal(g)
    assert cut.edges == [] and r[0][0].driver == 0


def test_every_ff_in_scc_is_cut():
    # two flip-flops in one loop: both have their in-SCC edges cut
    g = _graph(4, [(0, 1, "I0"), (1, 2, "D"), (2, 3, "I0"), (3, 0, "D")], clocked={0, 2})
    cut, r = cycle_removal(g)
    assert sorted(r) == [0, 2]
    assert topological_order(cut) is not None


def test_edges_from_outside_scc_kept():
    g = _graph(3, [(2, 0, "CE"), (0, 1, "I0"), (1, 0, "D")], clocked={0})
    cut, r = cycle_removal(g)
    assert (2, 0) in {(e.src, e.dst) for e in cut.edges}
    assert [c.pin for c in r[0]] == ["D"]


def test_combinational_loop_witness():
    g = _graph(3, [(0, 1, "I0"), (1, 2, "I0"), (2, 0, "I0")])
    with pytest.raises(CombinationalLoop) as ei:
        cycle_removal(g)
    assert sorted(ei.value.cycle) == ["v0", "v1", "v2"]
    assert "v0 -> v1 -> v2 -> v0" in str(ei.value)


def test_loop_through_clock_pin_rejected():
    g = _graph(2, [(0, 1, "I0"), (1, 0, "C")], clocked={0})
    with pytest.raises(CombinationalLoop, match="clock"):
        cycle_removal(g)


def test_loop_through_clear_pin_rejected():
    g = _graph(2, [(0, 1, "I0"), (1, 0, "CLR")], clocked={0})
    with pytest.raises(CombinationalLoop):
        cycle_removal(g)


@pytest.mark.parametrize("src, members", [(RING, {"i0", "i1", "i2"}), (SELF_LOOP, {"g"})])
def test_netlist_loops_rejected(src, members):
    g = build_dfg(load_design(src))
    with pytest.raises(CombinationalLoop) as ei:
        cycle_removal(g)
    assert set(ei.value.cycle) == members


@pytest.mark.parametrize("seed", range(300))
def test_cycle_removal_random(seed):
    g = random_dfg(seed)
    try:
        cut, r = cycle_removal(g)
    except CombinationalLoop as e:
        # the witness is a real cycle
        names = {v.name: v.id for v in g.vertices}
        ids = [names[n] for n in e.cycle]
        pairs = {(x.src, x.dst) for x in g.edges}
        assert all((ids[i], ids[(i + 1) % len(ids)]) in pairs for i in range(len(ids)))
        return
    assert is_topo_sortable(cut)
    removed = set(g.edges) - set(cut.edges)
    for e in removed:
        assert g.vertices[e.dst].clocked and e.pin not in ("C", "CLR")


def test_find_cycle_none_on_dag():
    assert find_cycle(_graph(3, [(0, 1, "I0"), (0, 2, "I0"), (1, 2, "I0")])) is None


def test_dumps():
    g = build_dfg(load_design(DFF_CHAIN))
    dot = to_dot(g, tarjan_scc(g))
    assert dot.startswith('digraph "dfg" {') and "->" in dot
    assert "dff0" in format_scc(g, tarjan_scc(g))
