import itertools

from hypothesis import given
from hypothesis import strategies as st

from dfgen.symexec import Solver, solve
from dfgen.symexec.expr import evaluate, mk_bin, mk_un, negate, sym
from dfgen.symexec.solver import SAT, UNSAT, model_satisfies

X, Y = sym("x"), sym("y")
BOX = [mk_bin(">=", X, -8), mk_bin("<=", X, 8), mk_bin(">=", Y, -8), mk_bin("<=", Y, 8)]

atoms = st.one_of(st.sampled_from([X, Y]), st.integers(-5, 5))


def _terms(kids):
    nonzero = st.integers(-4, 4).filter(bool)
    return st.one_of(
        st.builds(lambda op, a, b: mk_bin(op, a, b), st.sampled_from("+-*"), kids, kids),
        st.builds(lambda op, a, b: mk_bin(op, a, b), st.sampled_from("/%"), kids, nonzero),
        st.builds(lambda a: mk_un("neg", a), kids),
    )


terms = st.recursive(atoms, _terms, max_leaves=4)
atoms_bool = st.builds(lambda op, a, b: mk_bin(op, a, b), st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), terms, terms)
formulas = st.lists(st.one_of(atoms_bool, atoms_bool.map(negate)), min_size=1, max_size=3)


def _brute(cs):
    for x, y in itertools.product(range(-8, 9), repeat=2):
        if all(evaluate(c, {"x": x, "y": y}) is True for c in cs):
            return True
    return False


@given(formulas)
def test_solver_agrees_with_brute_force_on_a_box(cs):
    cs = [c for c in cs if c is not True]
    if any(c is False for c in cs):
        assert solve(cs).status == UNSAT
        return
    r = solve(BOX + cs, inputs={"x": "int", "y": "int"})
    assert r.status == (SAT if _brute(cs) else UNSAT)
    if r.status == SAT:
        assert model_satisfies(BOX + cs, r.model)


def test_wraparound_is_modelled():
    # x + 1 < x only holds at INT_MAX
    r = solve([mk_bin("<", mk_bin("+", X, 1), X)])
    assert r.status == SAT and r.model["x"] == 2**31 - 1


def test_division_truncates_toward_zero():
    r = solve([mk_bin("==", mk_bin("/", X, 2), -3), mk_bin("<", X, -6)])
    assert r.status == SAT and r.model["x"] == -7


def test_unsat_core_case():
    assert solve([mk_bin(">", X, 0), mk_bin("<", X, 1)]).status == UNSAT


def test_bool_symbols():
    b = sym("b", "bool")
    r = solve([b], inputs={"b": "bool", "x": "int"})
    assert r.status == SAT and r.model["b"] is True and "x" in r.model


def test_cache_reuses_results():
    s = Solver()
    cs = (mk_bin(">", X, 3),)
    s.check(cs)
    s.check(cs)
    assert s.queries == 1


def test_smtlib_output():
    text = Solver().to_smtlib([mk_bin(">", X, 3)])
    assert "(declare-fun x () (_ BitVec 32))" in text and "check-sat" in text
