import math

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfgen.errors import NoDominator
from dfgen.frontend import load
from dfgen.frontend.ir import Site
from dfgen.graphs import ICFG, Distances, callgraph_distance, dominator_tree

from conftest import corpus_context, corpus_names


def _site(prog, func, line, kind=None):
    f = prog.functions[func]
    return next(Site(func, i) for i, ins in enumerate(f.instrs) if ins.line == line and (kind is None or ins.kind == kind))


def _nx_idom(succ, root):
    g = nx.DiGraph()
    g.add_node(root)
    for a, outs in succ.items():
        for b in outs:
            g.add_edge(a, b)
    out = dict(nx.immediate_dominators(g, root))
    out[root] = None
    return out


@pytest.mark.parametrize("name", corpus_names())
def test_supergraph_dominators_match_networkx(name):
    icfg = corpus_context(name).icfg
    assert icfg.idoms() == _nx_idom(icfg.supergraph(), icfg.prog.entry_site())


graphs = st.integers(2, 14).flatmap(lambda n: st.lists(
    st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=1, max_size=3 * n))


@given(graphs)
def test_random_graph_dominators_match_networkx(edges):
    succ = {}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
    assert dominator_tree(succ, 0) == _nx_idom(succ, 0)


def test_entry_has_no_immediate_dominator(power):
    with pytest.raises(NoDominator):
        power.icfg.immediate_dominator(power.prog.entry_site())


def test_every_node_is_dominated_by_the_entry(power):
    icfg = power.icfg
    for n in icfg.reachable():
        assert icfg.dominates(icfg.prog.entry_site(), n)


def test_power_distances_count_statements(power):
    prog, d = power.prog, power.distances
    l13 = _site(prog, "power", 13)
    assert d.instruction_distance(_site(prog, "power", 9), l13) == 1
    assert d.instruction_distance(_site(prog, "power", 10, "assign"), l13) == 3
    assert d.instruction_distance(l13, l13) == 0


def test_unreachable_target_is_infinite(power):
    prog, d = power.prog, power.distances
    l4 = _site(prog, "power", 4)
    assert math.isinf(d.instruction_distance(_site(prog, "power", 18), l4))


def test_loops_found_in_power(power):
    icfg = power.icfg
    assert not icfg.is_loop_free()
    info = icfg.loops("power")
    assert len(info.back_edges) == 1
    ((_, header),) = info.back_edges
    assert icfg.prog.functions["power"].instrs[header].line == 9


@pytest.mark.parametrize("name, free", [("triangle", True), ("tcas", True), ("power", False), ("gcd", False)])
def test_loop_freedom(name, free):
    assert corpus_context(name).icfg.is_loop_free() is free


def test_recursion_detected():
    assert corpus_context("gcd").icfg.recursive_functions() == {"gcd"}
    assert corpus_context("tcas").icfg.recursive_functions() == set()


def test_call_costs_callee_run():
    prog = load("int g(int a) { int b; b = a + 1; return b; }\n"
                "int f(int x) {\n  int y;\n  y = g(x);\n  y = y + 1;\n  return y;\n}\n#pragma entry f\n")
    d = Distances(ICFG(prog))
    assert d.distance2return("g") == 2
    call = _site(prog, "f", 4)
    after = _site(prog, "f", 5)
    # the callee's two statements plus the call and the return
    assert d.instruction_distance(call, after) == d.distance2return("g") + 2


def test_callgraph_distance():
    icfg = corpus_context("tcas").icfg
    assert callgraph_distance(icfg, "alt_sep_test", "alt_sep_test") == 0
    assert callgraph_distance(icfg, "alt_sep_test", "own_below_threat") == 1
    assert math.isinf(callgraph_distance(icfg, "own_below_threat", "alt_sep_test"))


def test_dot_mentions_every_function():
    icfg = corpus_context("find").icfg
    dot = icfg.to_dot()
    assert dot.startswith("digraph")
    for f in ("swap", "order", "find"):
        assert f in dot
