from collections import deque

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfgen.context import ProgramContext
from dfgen.dataflow import compute_pairs, cut_point_lines, find_pair, pair_ids, var_key
from dfgen.frontend import ir, load
from dfgen.frontend.ir import Site
from dfgen.interp import measure_coverage, run

from conftest import by_lines, corpus_context, corpus_names, manifest

SINGLE = [n for n in corpus_names() if len(corpus_context(n).prog.functions) == 1]


@pytest.mark.parametrize("name", corpus_names())
def test_pair_counts_match_manifest(name):
    assert len(corpus_context(name).pairs) == manifest().get(name).pairs


def test_power_pairs_are_the_expected_fifteen(power):
    got = sorted(p.describe(power.prog) for p in power.pairs)
    want = sorted([
        "(l5, l9F, exp)", "(l5, l9T, exp)", "(l5, l11, exp)", "(l7, l9F, exp)", "(l7, l9T, exp)", "(l7, l11, exp)",
        "(l8, l10, res)", "(l8, l17, res)", "(l8, l18, res)", "(l10, l10, res)", "(l10, l17, res)",
        "(l10, l18, res)", "(l11, l9F, exp)", "(l11, l9T, exp)", "(l11, l11, exp)",
    ])
    assert got == want


def test_power_cut_points(power):
    p = by_lines(power, 8, 17, "res")
    assert cut_point_lines(power.icfg, p) == [4, 8, 9, 13, 14, 17]
    p = by_lines(power, 8, 18, "res")
    assert cut_point_lines(power.icfg, p) == [4, 8, 9, 13, 18]


def test_p_use_cut_points_end_on_the_edge(power):
    t = by_lines(power, 5, 9, "exp", "T")
    f = by_lines(power, 5, 9, "exp", "F")
    assert cut_point_lines(power.icfg, t)[-1] == 10
    assert cut_point_lines(power.icfg, f)[-1] == 13


def test_params_are_objectives_only_on_request():
    prog = corpus_context("triangle").prog
    default = compute_pairs(prog)
    full = ProgramContext(prog, include_params=True).pairs
    assert set(default) < set(full)
    assert all(prog.instr(p.def_site).kind in (ir.PARAM, ir.INPUT) for p in set(full) - set(default))


def test_ids_follow_sorted_order(power):
    ids = pair_ids(power.pairs)
    assert [ids[p] for p in power.pairs] == [f"du{i}" for i in range(1, 16)]
    assert power.pair("du8") == by_lines(power, 8, 17, "res")


def test_find_pair_reports_missing(power):
    with pytest.raises(KeyError):
        find_pair(power.prog, power.pairs, 1, 2, "nope")


def test_globals_flow_through_calls():
    prog = load("int g;\nvoid set(int v) {\n  g = v;\n}\nint f(int x) {\n  set(x);\n  return g;\n}\n#pragma entry f\n")
    ctx = ProgramContext(prog)
    assert by_lines(ctx, 3, 7, "g")


def test_local_defs_skip_calls():
    prog = load("int h(int a) { return a; }\nint f(int x) {\n  int y;\n  y = 1;\n  x = h(y);\n  return y;\n}\n"
                "#pragma entry f\n")
    ctx = ProgramContext(prog)
    assert by_lines(ctx, 4, 6, "y")


# Brute-force oracle: a definition reaches a site when some CFG path from it
# gets there without passing another write of the same variable.

def _oracle(prog, func):
    f = prog.functions[func]
    out = set()
    for i, ins in enumerate(f.instrs):
        w = ins.writes()
        if w is None:
            continue
        seen = set()
        work = deque(f.successors(i))
        while work:
            j = work.popleft()
            if j in seen:
                continue
            seen.add(j)
            out.add((i, j, w))
            if f.instrs[j].writes() != w:
                work.extend(f.successors(j))
    return out


@pytest.mark.parametrize("name", SINGLE)
def test_reaching_definitions_match_path_search(name):
    ctx = corpus_context(name)
    prog, rd = ctx.prog, ctx.reaching
    func = prog.entry
    f = prog.functions[func]
    got = set()
    for j in range(len(f.instrs)):
        for d, (scope, var) in rd.IN.get(Site(func, j), ()):
            got.add((d.index, j, var))
    reachable = {s.index for s in ctx.icfg.reachable()}
    want = {(i, j, w) for i, j, w in _oracle(prog, func) if i in reachable}
    assert got == want


def _int_inputs(prog):
    return {k: v for k, v in prog.inputs.items() if v == "int"}


@pytest.mark.parametrize("name", [n for n in corpus_names() if set(corpus_context(n).prog.inputs.values()) <= {"int"}])
@given(data=st.data())
def test_covered_pairs_are_static_pairs_and_follow_cut_points(name, data):
    ctx = corpus_context(name)
    prog = ctx.prog
    inputs = {k: data.draw(st.integers(-6, 6), label=k) for k in _int_inputs(prog)}
    trace = run(prog, inputs, fuel=5_000)
    everything = compute_pairs(prog, ctx.icfg, include_params=True)
    hit = measure_coverage(prog, trace, everything)
    assert set(hit) <= set(everything)
    sites = trace.sites()
    # step index -> position among non-return steps
    pos = [i for i, s in enumerate(trace.steps) if not s.ret]
    for pair, idx in hit.items():
        if pair not in ctx.ids:
            continue
        upto = pos.index(idx) + (2 if pair.edge else 1)
        it = iter(sites[:upto])
        assert all(any(s == c for s in it) for c in ctx.cut_points(pair)), ctx.ids[pair]


def test_var_key_scopes():
    prog = corpus_context("tcas").prog
    g = next(iter(prog.globals))
    assert var_key(prog, "alt_sep_test", g) == (None, g)
