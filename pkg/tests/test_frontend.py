import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfgen.errors import DfcSyntaxError, DfcTypeError, UnresolvedName, UnsupportedConstruct
from dfgen.frontend import ir, load, parse, print_program
from dfgen.frontend import ast as A
from dfgen.interp import run
from dfgen.semantics import wrap

from conftest import CORPUS, corpus_names, corpus_program


def test_power_parses_to_one_function():
    tree = parse((CORPUS / "power.dfc").read_text())
    assert [f.name for f in tree.functions] == ["power"]
    prog = corpus_program("power")
    lines = {i.line for i in prog.functions["power"].instrs if i.kind != ir.GOTO}
    assert lines == {1, 4, 5, 7, 8, 9, 10, 11, 13, 14, 15, 17, 18}


def test_empty_file_has_no_entry():
    with pytest.raises(DfcSyntaxError):
        load("")


def test_compound_assignment_is_two_instructions():
    prog = load("int f(int x) { int res; res = 1; res *= x; return res; }")
    body = [i for i in prog.functions["f"].instrs if i.line == 1 and i.kind == ir.ASSIGN]
    mul = [i for i in body if i.op == "*"]
    assert len(mul) == 1
    t = mul[0].dst
    assert ir.is_temp(t)
    copy = body[body.index(mul[0]) + 1]
    assert copy.dst == "res" and copy.op is None and copy.args == (ir.Var(t),)


def test_compound_assignment_keeps_position():
    tree = parse("int f(int x) {\n  int res;\n  res *= x;\n  return res;\n}")
    stmt = tree.functions[0].body.stmts[1]
    assert isinstance(stmt, A.Assign) and stmt.op == "*" and stmt.pos.line == 3


def test_if_else_lowers_to_branch_and_two_blocks():
    prog = corpus_program("power")
    f = prog.functions["power"]
    br = next(i for i in f.instrs if i.line == 4)
    assert br.kind == ir.BRANCH and br.op == ">"
    t, e = br.targets
    assert f.instrs[t].line == 5 and f.instrs[t].dst == "exp"
    assert f.instrs[e].line == 7 and f.instrs[e].dst == "exp" and f.instrs[e].op == "neg"


@pytest.mark.parametrize("name", corpus_names())
def test_print_then_reload_is_a_fixpoint(name):
    prog = corpus_program(name)
    again = load(print_program(prog))
    assert again.structure() == prog.structure()
    assert print_program(again) == print_program(prog)


@pytest.mark.parametrize("name", corpus_names())
def test_three_address_form(name):
    prog = corpus_program(name)
    for f in prog.functions.values():
        for ins in f.instrs:
            assert all(isinstance(a, (ir.Var, ir.Const)) for a in ins.args)
            if ins.kind == ir.BRANCH:
                assert len(ins.args) == (1 if ins.op is None else 2)
            assert len(ins.args) <= 2 or ins.kind in (ir.CALL,)


@pytest.mark.parametrize("name", corpus_names())
def test_every_instruction_maps_to_a_source_line(name):
    prog = corpus_program(name)
    for f in prog.functions.values():
        for ins in f.instrs:
            assert f.line <= ins.line <= f.end_line


@pytest.mark.parametrize("name", corpus_names())
def test_lowering_is_deterministic(name):
    text = (CORPUS / f"{name}.dfc").read_text()
    assert load(text).structure() == load(text).structure()


@pytest.mark.parametrize("src, exc", [
    ("int f(int x) { int a[3]; return 0; }", UnsupportedConstruct),
    ("int f(int x) { int i; for (i = 0; i < 3; i++) x = x + 1; return x; }", UnsupportedConstruct),
    ("int f(int x) { int *p; p = &x; p = p + 1; return x; }", UnsupportedConstruct),
    ("int f(int x) { return y; }", UnresolvedName),
    ("int f(int x) { return x }", DfcSyntaxError),
    ("int f(int x) { bool b; b = x; return 0; }", DfcTypeError),
])
def test_bad_programs_fail_loudly(src, exc):
    with pytest.raises(exc):
        load(src)


def test_short_circuit_splits_into_nested_branches():
    prog = load("int f(int a, int b) { if (a > 0 && b > 0) return 1; return 0; }")
    branches = [i for i in prog.functions["f"].instrs if i.kind == ir.BRANCH]
    assert [b.op for b in branches] == [">", ">"]


def test_while_has_a_back_edge():
    prog = load("int f(int n) { while (n > 0) n = n - 1; return n; }")
    f = prog.functions["f"]
    header = next(i for i, ins in enumerate(f.instrs) if ins.kind == ir.BRANCH)
    assert any(ins.kind == ir.GOTO and ins.targets == (header,) for ins in f.instrs)


# Random expressions: interpreting the lowered code must agree with a direct
# evaluation of the expression under 32-bit C semantics.

def _c_div(a, b):
    q = abs(a) // abs(b)
    return wrap(-q if (a < 0) != (b < 0) else q)


def _eval(tree, env):
    op = tree[0]
    if op == "lit":
        return tree[1]
    if op == "var":
        return env[tree[1]]
    a, b = _eval(tree[1], env), _eval(tree[2], env)
    if op == "+":
        return wrap(a + b)
    if op == "-":
        return wrap(a - b)
    if op == "*":
        return wrap(a * b)
    if b == 0:
        raise ZeroDivisionError
    if op == "/":
        return _c_div(a, b)
    return wrap(a - b * _c_div(a, b))


def _text(tree):
    if tree[0] == "lit":
        return f"({tree[1]})"
    if tree[0] == "var":
        return tree[1]
    return f"({_text(tree[1])} {tree[0]} {_text(tree[2])})"


leaves = st.one_of(st.tuples(st.just("lit"), st.integers(-20, 20)), st.tuples(st.just("var"), st.sampled_from("xyz")))
exprs = st.recursive(leaves, lambda kids: st.tuples(st.sampled_from("+-*/%"), kids, kids), max_leaves=8)
ints = st.integers(-(1 << 31), (1 << 31) - 1)


@given(exprs, ints, ints, ints)
def test_lowered_expressions_evaluate_like_c(tree, x, y, z):
    prog = load(f"int f(int x, int y, int z) {{ int r; r = {_text(tree)}; return r; }}")
    env = {"x": x, "y": y, "z": z}
    trace = run(prog, env)
    try:
        expected = _eval(tree, env)
    except ZeroDivisionError:
        assert trace.status == "trap"
        return
    assert trace.status == "return" and trace.value == expected
