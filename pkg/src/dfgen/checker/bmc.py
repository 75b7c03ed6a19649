"""Bounded reachability of the error site in an instrumented program.

The default encoding unrolls the interprocedural CFG into a DAG whose nodes
are (call context, site, loop counters) and builds one formula: each node
gets a reachability guard and a symbolic store merged with ``ite`` at joins.
Loop and call-depth accounting is identical to the symbolic machine's, so
both engines agree on what "within bounds" means. Edges that would exceed a
bound are collected separately: if none of them is reachable the result is
exact.

``mode="paths"`` instead enumerates paths one by one with the symbolic
machine, pruning unsatisfiable prefixes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import z3

from ..errors import PathBudgetExceeded
from ..frontend import ir
from ..frontend.ir import Const, IRProgram, Site, Var
from ..graphs import ICFG
from ..interp.coverage import replay_covers
from ..interp.interpreter import normalise_inputs
from ..verdict import FEASIBLE, INFEASIBLE, INFEASIBLE_WITHIN_BOUND, UNKNOWN, EngineResult, Verdict
from .instrument import InstrumentedProgram

MAX_NODES = 200_000
MAX_PATHS = 10_000


@dataclass(frozen=True)
class CheckBounds:
    unwind: int = 2
    depth: int = 2

    def __post_init__(self):
        if self.unwind < 1 or self.depth < 1:
            raise ValueError("unwind and depth must both be at least 1")

    def as_tuple(self) -> tuple[int, int]:
        return (self.unwind, self.depth)


class _Unroller:
    """Structure of the bounded unrolling."""

    def __init__(self, prog: IRProgram, icfg: ICFG, bounds: CheckBounds, max_nodes: int):
        self.prog = prog
        self.icfg = icfg
        self.bounds = bounds
        self.max_nodes = max_nodes

    def loop_edge(self, func: str, loops: tuple, u: int, v: int):
        """Loop counters after edge u -> v, or None when it exceeds the bound."""
        info = self.icfg.loops(func)
        d = dict(loops)
        for h in info.exits(u, v):
            d.pop(h, None)
        if (u, v) in info.back_edges:
            n = d.get(v, 0) + 1
            if n > self.bounds.unwind:
                return None
            d[v] = n
        return tuple(sorted(d.items()))

    def successors(self, node) -> list[tuple[str, object]]:
        ctx, site, loops = node
        f = self.prog.functions[site.func]
        ins = f.instrs[site.index]
        k = ins.kind

        def local(kind: str, v: int):
            nl = self.loop_edge(site.func, loops, site.index, v)
            return (kind, None) if nl is None else (kind, (ctx, Site(site.func, v), nl))

        if k == ir.BRANCH:
            t, e = ins.targets
            return [local("T", t), local("F", e)]
        if k == ir.GOTO:
            return [local("seq", ins.targets[0])]
        if k == ir.CALL:
            if len(ctx) + 1 > self.bounds.depth:
                return [("call", None)]
            return [("call", (ctx + ((site, loops),), Site(ins.callee, 0), ()))]
        if k == ir.RETURN:
            if not ctx:
                return [("exit", None)]
            cs, cl = ctx[-1]
            nl = self.loop_edge(cs.func, cl, cs.index, cs.index + 1)
            return [("ret", None if nl is None else (ctx[:-1], Site(cs.func, cs.index + 1), nl))]
        if k in (ir.ABORT, ir.ERROR):
            return [(k, None)]
        return [local("seq", site.index + 1)]

    def build(self):
        root = ((), Site(self.prog.entry, 0), ())
        succ: dict = {}
        stack = [root]
        while stack:
            n = stack.pop()
            if n in succ:
                continue
            out = self.successors(n)
            succ[n] = out
            if len(succ) > self.max_nodes:
                raise PathBudgetExceeded(f"unrolling exceeds {self.max_nodes} nodes")
            for _, m in out:
                if m is not None and m not in succ:
                    stack.append(m)
        # Kahn's algorithm; a cycle would mean the counters failed to bound a loop
        indeg = {n: 0 for n in succ}
        for outs in succ.values():
            for _, m in outs:
                if m is not None:
                    indeg[m] += 1
        order = []
        ready = [root]
        while ready:
            n = ready.pop()
            order.append(n)
            for _, m in succ[n]:
                if m is not None:
                    indeg[m] -= 1
                    if indeg[m] == 0:
                        ready.append(m)
        if len(order) != len(succ):
            raise RuntimeError("bounded unrolling is not acyclic")
        return root, succ, order


def _bv(v: int):
    return z3.BitVecVal(v, 32)


def _apply(op: str, a, b=None):
    if b is None:
        return -a if op == "neg" else z3.Not(a)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if op == "%":
        return z3.SRem(a, b)
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(op)


class _Encoder:
    def __init__(self, prog: IRProgram):
        self.prog = prog
        self.syms = {name: (z3.Bool(name) if t == "bool" else z3.BitVec(name, 32)) for name, t in prog.inputs.items()}
        self.ids: dict = {}  # cell -> address id (0 is null)

    def default(self, typ: str):
        return z3.BoolVal(False) if typ == "bool" else _bv(0)

    def addr(self, c):
        if c not in self.ids:
            self.ids[c] = len(self.ids) + 1
        return _bv(self.ids[c])

    def initial_env(self) -> dict:
        env = {(None, g): self.default(t) for g, t in self.prog.globals.items()}
        for name, t in self.prog.functions[self.prog.entry].locals.items():
            env[((), name)] = self.default(t)
        return env

    def encode(self, root, succ, order):
        prog = self.prog
        incoming: dict = {root: [(z3.BoolVal(True), self.initial_env())]}
        errors, truncs = [], []
        for node in order:
            ins_list = incoming.pop(node, None)
            if not ins_list:
                continue
            g, env = self.merge(ins_list)
            ctx, site, loops = node
            f = prog.functions[site.func]
            ins = f.instrs[site.index]

            def cell(name, ctx=ctx, f=f):
                return (ctx, name) if name in f.locals else (None, name)

            def val(o, env=env, cell=cell):
                if isinstance(o, Var):
                    return env[cell(o.name)]
                if o.value is None:
                    return _bv(0)
                return z3.BoolVal(o.value) if isinstance(o.value, bool) else _bv(o.value)

            k = ins.kind
            ok = None
            conds = None
            env = dict(env)
            if k == ir.PARAM:
                idx = ins.args[0].value
                env[cell(ins.dst)] = self.syms[ins.dst] if not ctx else env[(ctx, f"#arg{idx}")]
            elif k == ir.INPUT:
                env[cell(ins.dst)] = self.syms[ins.dst]
            elif k == ir.ASSIGN:
                if ins.op is None:
                    v = val(ins.args[0])
                elif len(ins.args) == 1:
                    v = _apply(ins.op, val(ins.args[0]))
                else:
                    a, b = val(ins.args[0]), val(ins.args[1])
                    if ins.op in ("/", "%"):
                        ok = b != 0
                    v = _apply(ins.op, a, b)
                env[cell(ins.dst)] = v
            elif k == ir.ADDR:
                env[cell(ins.dst)] = self.addr(cell(ins.args[0].name))
            elif k == ir.PCOPY:
                env[cell(ins.dst)] = val(ins.args[0])
            elif k == ir.LOAD:
                p = val(ins.args[0])
                ok = p != 0
                env[cell(ins.dst)] = self.load(env, p)
            elif k == ir.STORE:
                p = val(ins.args[0])
                ok = p != 0
                self.store(env, p, val(ins.args[1]))
            elif k == ir.BRANCH:
                c = val(ins.args[0]) if ins.op is None else _apply(ins.op, val(ins.args[0]), val(ins.args[1]))
                conds = {"T": c, "F": z3.Not(c)}
            elif k == ir.CALL:
                args = [val(a) for a in ins.args]
                callee = prog.functions[ins.callee]
                nctx = ctx + ((site, loops),)
                for name, t in callee.locals.items():
                    env[(nctx, name)] = self.default(t)
                for i, a in enumerate(args):
                    env[(nctx, f"#arg{i}")] = a
            elif k == ir.RETURN:
                if ctx:
                    cs = ctx[-1][0]
                    cins = prog.instr(cs)
                    if cins.dst is not None:
                        caller = prog.functions[cs.func]
                        dc = (ctx[:-1], cins.dst) if cins.dst in caller.locals else (None, cins.dst)
                        env[dc] = val(ins.args[0])
            elif k == ir.ERROR:
                errors.append(g)
                continue
            if ok is not None:
                g = z3.And(g, ok)
            for kind, m in succ[node]:
                eg = g if conds is None else z3.And(g, conds[kind])
                if m is None:
                    if kind not in ("exit", ir.ABORT):
                        truncs.append(eg)
                    continue
                incoming.setdefault(m, []).append((eg, env))
        return errors, truncs

    def merge(self, items):
        if len(items) == 1:
            return items[0]
        g = z3.Or([x[0] for x in items])
        keys = set()
        for _, e in items:
            keys.update(e)
        env = {}
        for key in keys:
            vals = [e.get(key) for _, e in items]
            first = next(v for v in vals if v is not None)
            vals = [first if v is None else v for v in vals]
            if all(v.eq(first) for v in vals):
                env[key] = first
                continue
            acc = vals[-1]
            for (gi, _), vi in zip(reversed(items[:-1]), reversed(vals[:-1])):
                acc = z3.If(gi, vi, acc)
            env[key] = acc
        return g, env

    def _targets(self, env):
        return [(c, _bv(i)) for c, i in self.ids.items() if c in env]

    def load(self, env, p):
        p = z3.simplify(p)
        if z3.is_bv_value(p):
            for c, i in self.ids.items():
                if i == p.as_long():
                    return env[c]
            return _bv(0)
        acc = _bv(0)
        for c, a in self._targets(env):
            acc = z3.If(p == a, env[c], acc)
        return acc

    def store(self, env, p, v):
        p = z3.simplify(p)
        if z3.is_bv_value(p):
            for c, i in self.ids.items():
                if i == p.as_long():
                    env[c] = v
            return
        for c, a in self._targets(env):
            env[c] = z3.If(p == a, v, env[c])


def _signed(v: int) -> int:
    return v - (1 << 32) if v & 0x80000000 else v


def _model_inputs(prog: IRProgram, m: z3.ModelRef, syms: dict) -> dict:
    out = {}
    for name, t in prog.inputs.items():
        v = m.eval(syms[name], model_completion=True)
        out[name] = z3.is_true(v) if t == "bool" else _signed(v.as_long())
    return out


def _feasible(ip: InstrumentedProgram, test: dict, engine: str, bounds) -> Verdict:
    test = normalise_inputs(ip.base, test)
    if not replay_covers(ip.base, test, ip.pair):
        return Verdict(UNKNOWN, engine, reason="counterexample did not replay to coverage", bounds=bounds)
    return Verdict(FEASIBLE, engine, test=test, bounds=bounds)


def _monolithic(ip: InstrumentedProgram, bounds: CheckBounds, timeout_ms: int, icfg: ICFG) -> tuple[Verdict, dict]:
    b = bounds.as_tuple()
    try:
        root, succ, order = _Unroller(ip.prog, icfg, bounds, MAX_NODES).build()
    except PathBudgetExceeded as e:
        return Verdict(UNKNOWN, "bmc", reason=str(e), bounds=b), {}
    enc = _Encoder(ip.prog)
    errors, truncs = enc.encode(root, succ, order)
    stats = {"nodes": len(order)}
    s = z3.SolverFor("QF_BV")
    s.set("timeout", timeout_ms)
    if errors:
        s.add(z3.Or(errors))
        r = s.check()
        stats["queries"] = 1
        if r == z3.sat:
            return _feasible(ip, _model_inputs(ip.prog, s.model(), enc.syms), "bmc", b), stats
        if r != z3.unsat:
            return Verdict(UNKNOWN, "bmc", reason="solver: " + s.reason_unknown(), bounds=b), stats
    if not truncs:
        return Verdict(INFEASIBLE, "bmc", proof="bmc-complete", bounds=b), stats
    s = z3.SolverFor("QF_BV")
    s.set("timeout", timeout_ms)
    s.add(z3.Or(truncs))
    stats["queries"] = stats.get("queries", 0) + 1
    if s.check() == z3.unsat:
        return Verdict(INFEASIBLE, "bmc", proof="bmc-complete", bounds=b), stats
    return Verdict(INFEASIBLE_WITHIN_BOUND, "bmc", proof="bmc-bounded", bounds=b), stats


def _paths(ip: InstrumentedProgram, bounds: CheckBounds, timeout_ms: int, icfg: ICFG) -> tuple[Verdict, dict]:
    from ..symexec.machine import EXIT, FORK, TRUNCATED, Machine
    from ..symexec.solver import SAT, UNSAT, Solver

    b = bounds.as_tuple()
    solver = Solver(timeout_ms)
    machine = Machine(ip.prog, icfg, bounds=b)
    stack = [machine.initial_state()]
    truncated = unknown = False
    n = 0
    while stack:
        st = stack.pop()
        while True:
            kind, payload = machine.step(st)
            if kind == FORK:
                for child, _ in reversed(payload):
                    r = solver.check(child.pc).status
                    if r == UNSAT:
                        continue
                    unknown |= r != SAT
                    if child.status == "truncated":
                        truncated = True
                        n += 1
                    else:
                        stack.append(child)
                break
            if kind in (EXIT, TRUNCATED):
                n += 1
                if kind == TRUNCATED and solver.check(st.pc).status != UNSAT:
                    truncated = True
                if kind == EXIT and st.status == "error":
                    r = solver.check(st.pc, want_model=True, inputs=ip.prog.inputs)
                    if r.status == SAT:
                        return _feasible(ip, r.model, "bmc", b), {"paths": n, "queries": solver.queries}
                    unknown |= r.status != UNSAT
                break
        if n > MAX_PATHS:
            return Verdict(UNKNOWN, "bmc", reason=f"more than {MAX_PATHS} paths", bounds=b), {"paths": n}
    stats = {"paths": n, "queries": solver.queries}
    if unknown:
        return Verdict(UNKNOWN, "bmc", reason="solver unknown", bounds=b), stats
    if truncated:
        return Verdict(INFEASIBLE_WITHIN_BOUND, "bmc", proof="bmc-bounded", bounds=b), stats
    return Verdict(INFEASIBLE, "bmc", proof="bmc-complete", bounds=b), stats


def bmc_check(ip: InstrumentedProgram, bounds: CheckBounds | None = None, timeout_ms: int = 30_000,
              mode: str = "monolithic", icfg: ICFG | None = None) -> EngineResult:
    """Decide whether the error site of ``ip`` is reachable within ``bounds``."""
    bounds = bounds or CheckBounds()
    icfg = icfg or ICFG(ip.prog)
    t0 = time.perf_counter()
    if mode == "monolithic":
        verdict, stats = _monolithic(ip, bounds, timeout_ms, icfg)
    elif mode == "paths":
        verdict, stats = _paths(ip, bounds, timeout_ms, icfg)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ms = (time.perf_counter() - t0) * 1000
    return EngineResult(verdict, selections=0, instrs=0, paths_explored=stats.get("paths", 0), time_ms=ms,
                        log=[stats], solver_queries=stats.get("queries", 0))
