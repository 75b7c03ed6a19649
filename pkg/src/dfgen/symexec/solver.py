"""Constraint solving over 32-bit bit-vectors, backed by z3."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import z3

from .expr import Expr, evaluate, symbols

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


@dataclass(frozen=True)
class SolverResult:
    status: str
    model: dict | None = None
    reason: str = ""

    @property
    def sat(self) -> bool:
        return self.status == SAT


def _signed(v: int) -> int:
    return v - (1 << 32) if v & 0x80000000 else v


class Translator:
    """Maps expressions to z3 terms, caching on the expression node."""

    def __init__(self, ctx: z3.Context | None = None):
        self.ctx = ctx or z3.main_ctx()
        self.vars: dict[tuple[str, str], z3.ExprRef] = {}

    def var(self, name: str, typ: str):
        key = (name, typ)
        if key not in self.vars:
            self.vars[key] = z3.Bool(name, self.ctx) if typ == "bool" else z3.BitVec(name, 32, self.ctx)
        return self.vars[key]

    def const(self, v):
        if isinstance(v, bool):
            return z3.BoolVal(v, self.ctx)
        return z3.BitVecVal(v, 32, self.ctx)

    def __call__(self, e):
        if not isinstance(e, Expr):
            return self.const(e)
        if e.z3 is not None and e.z3.ctx == self.ctx:
            return e.z3
        # iterative post-order to survive deep terms
        stack = [(e, False)]
        while stack:
            x, done = stack.pop()
            if not isinstance(x, Expr) or (x.z3 is not None and x.z3.ctx == self.ctx):
                continue
            if not done:
                stack.append((x, True))
                if x.op != "sym":
                    stack.extend((a, False) for a in x.args)
                continue
            x.z3 = self._node(x)
        return e.z3

    def _arg(self, a):
        return a.z3 if isinstance(a, Expr) else self.const(a)

    def _node(self, x: Expr):
        op = x.op
        if op == "sym":
            return self.var(x.args[0], x.type)
        a = [self._arg(y) for y in x.args]
        if op == "+":
            return a[0] + a[1]
        if op == "-":
            return a[0] - a[1]
        if op == "*":
            return a[0] * a[1]
        if op == "/":
            return a[0] / a[1]  # bvsdiv: truncates toward zero
        if op == "%":
            return z3.SRem(a[0], a[1])
        if op == "==":
            return a[0] == a[1]
        if op == "!=":
            return a[0] != a[1]
        if op == "<":
            return a[0] < a[1]
        if op == "<=":
            return a[0] <= a[1]
        if op == ">":
            return a[0] > a[1]
        if op == ">=":
            return a[0] >= a[1]
        if op == "neg":
            return -a[0]
        if op == "!":
            return z3.Not(a[0])
        if op == "and":
            return z3.And(*a)
        if op == "or":
            return z3.Or(*a)
        raise ValueError(op)


class Solver:
    """Satisfiability of conjunctions of boolean expressions.

    One incremental z3 solver is reused with push/pop; results are cached on
    the identity of the constraint tuple's elements. Before calling z3 the
    most recent models are tried against the constraints with the concrete
    semantics: a fork extends its parent's path condition, so one child is
    usually satisfied by the parent's model already.
    """

    REUSE = 8  # models kept for reuse
    UNSAT_MEMORY = 512  # unsatisfiable constraint sets kept, compared structurally

    def __init__(self, timeout_ms: int = 10_000):
        self.timeout_ms = timeout_ms
        self.tr = Translator()
        self._z3 = z3.Solver()  # the QF_BV logic solver is much slower under push/pop
        self._z3.set("timeout", timeout_ms)
        self.cache: dict = {}
        self.queries = 0
        self.unknowns = 0
        self.reused = 0
        self.unsat_sets: deque[frozenset] = deque(maxlen=self.UNSAT_MEMORY)
        self.models: deque[dict] = deque(maxlen=self.REUSE)
        self.solved: dict[frozenset, SolverResult] = {}  # slice results by structure
        self._sym_cache: dict = {}
        self._text_cache: dict = {}
        self._interned: dict = {}

    def check(self, constraints, want_model: bool = False, inputs: dict | None = None) -> SolverResult:
        cs = [c for c in constraints if c is not True]
        if any(c is False for c in cs):
            return SolverResult(UNSAT)
        key = (frozenset(map(id, cs)), want_model)
        hit = self.cache.get(key)
        if hit is not None and hit[1] == cs:
            return hit[0]
        res = self._decide(cs)
        if res.status == SAT:
            res = SolverResult(SAT, _complete(res.model, inputs) if want_model else None)
        self.cache[key] = (res, cs)
        return res

    def _decide(self, cs: list) -> SolverResult:
        text = frozenset(self._text(c) for c in cs)
        for core in self.unsat_sets:
            if core <= text:
                return SolverResult(UNSAT)
        newest_first = cs[::-1]  # a path condition grows at the end
        for m in reversed(self.models):
            if model_satisfies(newest_first, m):
                self.reused += 1
                return SolverResult(SAT, m)
        if self.models:
            # only the constraints sharing symbols with those the latest model
            # violates need solving; the rest keep that model's values
            base = self.models[-1]
            part = self._slice(cs, base)
            if len(part) < len(cs):
                part_text = frozenset(self._text(c) for c in part)
                r = self.solved.get(part_text)
                if r is None:
                    r = self._z3_check(part)
                    if r.status != UNKNOWN:
                        self.solved[part_text] = r
                if r.status == UNSAT:
                    self.unsat_sets.append(part_text)
                    return r
                if r.status == SAT:
                    merged = {**base, **r.model}
                    if model_satisfies(cs, merged):
                        self.models.append(merged)
                        return SolverResult(SAT, merged)
        r = self._z3_check(cs)
        if r.status == SAT:
            self.models.append(r.model)
        elif r.status == UNSAT:
            self.unsat_sets.append(text)
        return r

    def _text(self, c) -> int:
        """Structural identity of ``c``: equal numbers mean equal terms."""
        hit = self._text_cache.get(id(c))
        if hit is not None and hit[0] is c:
            return hit[1]
        if isinstance(c, Expr):
            if c.op == "sym":
                shape = ("sym", c.args[0], c.type)
            else:
                shape = (c.op, c.type, tuple(self._text(a) for a in c.args))
        else:
            shape = ("const", type(c).__name__, c)
        n = self._interned.setdefault(shape, len(self._interned))
        self._text_cache[id(c)] = (c, n)
        return n

    def _names(self, c) -> frozenset:
        hit = self._sym_cache.get(id(c))
        if hit is None or hit[0] is not c:
            hit = (c, frozenset(n for n, _ in symbols(c)))
            self._sym_cache[id(c)] = hit
        return hit[1]

    def _slice(self, cs: list, model: dict) -> list:
        bad = set()
        for c in cs:
            if not model_satisfies((c,), model):
                bad |= self._names(c)
        if not bad:
            return cs
        part, rest = [], list(cs)
        grew = True
        while grew:
            grew = False
            keep = []
            for c in rest:
                names = self._names(c)
                if names & bad:
                    part.append(c)
                    bad |= names
                    grew = True
                else:
                    keep.append(c)
            rest = keep
        return [c for c in cs if any(c is p for p in part)] if rest else cs

    def _z3_check(self, cs: list) -> SolverResult:
        self.queries += 1
        s = self._z3
        s.push()
        try:
            for c in cs:
                s.add(self.tr(c))
            r = s.check()
            if r == z3.sat:
                return SolverResult(SAT, self._model(s.model(), cs))
            if r == z3.unsat:
                return SolverResult(UNSAT)
            self.unknowns += 1
            return SolverResult(UNKNOWN, reason=s.reason_unknown())
        finally:
            s.pop()

    def _model(self, m: z3.ModelRef, cs) -> dict:
        names = {}
        for c in cs:
            for name, typ in symbols(c):
                names[name] = typ
        out = {}
        for name, typ in names.items():
            v = m.eval(self.tr.var(name, typ), model_completion=True)
            out[name] = z3.is_true(v) if typ == "bool" else _signed(v.as_long())
        return out

    def to_smtlib(self, constraints) -> str:
        s = z3.SolverFor("QF_BV")
        for c in constraints:
            if c is not True:
                s.add(self.tr(c))
        return s.to_smt2()


def _complete(model: dict, inputs: dict | None) -> dict:
    """A reused model plus defaults for inputs it does not mention; those
    inputs are unconstrained."""
    out = {name: (False if typ == "bool" else 0) for name, typ in (inputs or {}).items()}
    out.update(model)
    return out


def model_satisfies(constraints, model: dict) -> bool:
    """Check a model against every constraint with the interpreter semantics."""
    memo: dict = {}
    try:
        return all(evaluate(c, model, memo) is True for c in constraints)
    except (KeyError, ZeroDivisionError):
        return False


def solve(constraints, inputs: dict | None = None, timeout_ms: int = 10_000) -> SolverResult:
    """One-shot query with a model on success."""
    return Solver(timeout_ms).check(list(constraints), want_model=True, inputs=inputs)
