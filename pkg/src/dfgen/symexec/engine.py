"""Targeted symbolic execution of one def-use pair."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass

from ..context import ProgramContext
from ..dataflow import DefUsePair
from ..frontend.ir import IRProgram, Site
from ..graphs import INF
from ..interp.coverage import replay_covers
from ..interp.interpreter import normalise_inputs
from ..verdict import FEASIBLE, INFEASIBLE, UNKNOWN, EngineResult, Verdict
from . import alias as aliasing
from .machine import EXIT, FORK, TRUNCATED, Machine, SymState
from .search import make_searcher, weight
from .solver import SAT, UNSAT, Solver


@dataclass
class Budget:
    """Limits for one run. ``None`` disables a limit."""

    selections: int | None = 2000
    seconds: float | None = None
    instrs: int | None = None
    quantum: int = 10_000  # instructions per selection before requeueing
    solver_timeout_ms: int = 10_000
    unwind: int | None = 16  # loop iterations per state, None for no limit
    depth: int | None = 16  # call depth per state


def _path(st: SymState, prog: IRProgram) -> str:
    return " ".join(f"l{prog.line_of(s)}{'T' if d else 'F'}" for s, d in st.decision_list())


class PairSearch:
    """State for one run. Mirrors the usual worklist loop: pick a state,
    execute it up to the next fork or exit, check the children, and prune
    children of states that can no longer cover the pair."""

    def __init__(self, ctx: ProgramContext, pair: DefUsePair, strategy: str = "cpgs", budget: Budget | None = None,
                 seed: int = 0, tie_break: str = "random", lazy: bool = False, log: bool = False,
                 solver: Solver | None = None):
        self.ctx = ctx
        self.prog = ctx.prog
        self.pair = pair
        self.dist = ctx.distances
        self.budget = budget or Budget()
        self.tie_break = tie_break
        self.lazy = lazy
        self.logging = log
        self.log: list[dict] = []
        self.rng = random.Random(seed)
        self.solver = solver or Solver(self.budget.solver_timeout_ms)
        b = self.budget
        bounds = None
        if b.unwind is not None or b.depth is not None:
            bounds = (b.unwind or 1 << 30, b.depth or 1 << 30)
        self.machine = Machine(self.prog, ctx.icfg, bounds=bounds)
        self.lost = False  # a truncated state might still have covered the pair
        self.cuts = ctx.cut_points(pair)
        self.reachable = ctx.icfg.reachable()
        self.covered_sites: set[Site] = set()
        self.searcher = make_searcher(strategy, self, self.rng)
        self.parked: list[SymState] = []
        self.finite = 0  # pending states whose next cut point is reachable
        self.ids = itertools.count()
        self.selections = 0
        self.instrs = 0
        self.created = 0
        self.unknown_reasons: list[str] = []

    # bookkeeping

    def _cell_of(self, step):
        fn = self.prog.functions[step.site.func]
        return lambda name: (step.frame, name) if name in fn.locals else (None, name)

    def _target_cell(self, step):
        return (None, self.pair.var) if self.pair.scope is None else (step.frame, self.pair.var)

    def _next_cut(self, st: SymState) -> Site | None:
        return self.cuts[st.cut_idx] if st.cut_idx < len(self.cuts) else None

    def _distance(self, st: SymState) -> float:
        t = self._next_cut(st)
        return 0 if t is None else self.dist.from_stack(st.stack(), t)

    def observe(self, st: SymState, step, fresh: bool | None = None) -> None:
        """Update pair tracking and search metadata after one step. ``fresh``
        overrides whether the step counts as new coverage (fork siblings
        share it)."""
        pair = self.pair
        site = step.site
        if not step.ret:
            if fresh is None:
                fresh = site not in self.covered_sites
            self.covered_sites.add(site)
            st.since_new = 0 if fresh else st.since_new + 1
            cuts = self.cuts
            last = len(cuts) - 1
            if st.cut_idx <= last and site == cuts[st.cut_idx] and not (pair.edge and st.cut_idx == last):
                st.cut_idx += 1
            if pair.edge and st.cut_idx == last and site == pair.use_site and step.decision == (pair.edge == "T"):
                st.cut_idx += 1
            if site == pair.use_site and st.def_live:
                c = self._target_cell(step)
                if c == st.tracked and c in step.uses:
                    if pair.edge is None or step.decision == (pair.edge == "T"):
                        st.covered = True
        if site == pair.def_site and step.defs:  # a call defines on its return step
            c = self._target_cell(step)
            if c in step.defs:
                st.def_live = True
                st.tracked = c
                st.alias = aliasing.seed(c, st.mem)
                return
        if st.alias:
            ins = self.prog.instr(site)
            st.alias, redefined = aliasing.update(st.alias, ins, step, self._cell_of(step), st.mem)
            if redefined:
                st.def_live = False
                st.tracked = None
                st.alias = frozenset()
                if not st.doomed and self.dist.from_stack(st.stack(), pair.def_site) == INF:
                    st.doomed = True

    def enqueue(self, st: SymState) -> None:
        st.dist = self._distance(st)
        if st.dist != INF:
            self.finite += 1
        self.searcher.push(st)

    def enqueue_children(self, children: list[SymState]) -> None:
        for c in children:
            c.dist = self._distance(c)
            if c.dist != INF:
                self.finite += 1
            else:
                self._emit(event="park", state=c.sid, reason="next cut point unreachable")
        self.searcher.push_children(children)

    def _pop(self) -> SymState | None:
        st = self.searcher.pop()
        if st is not None:
            if st.dist != INF:
                self.finite -= 1
            return st
        if self.parked:
            return self.parked.pop(0)
        return None

    def _emit(self, **entry) -> None:
        if self.logging:
            self.log.append(entry)

    def _new(self, st: SymState, parent: SymState | None) -> None:
        st.sid = next(self.ids)
        st.created = st.sid
        st.parent = parent.sid if parent is not None else None
        self.created += 1

    def _check(self, st: SymState) -> str:
        r = self.solver.check(st.pc)
        if r.status == UNSAT:
            return UNSAT
        if r.status == SAT:
            st.checked = True
            return SAT
        self.unknown_reasons.append(r.reason or "solver unknown")
        return "unknown"

    def _park(self, st: SymState) -> None:
        st.parked = True
        st.checked = False
        self.parked.append(st)
        self._emit(event="park", state=st.sid, reason="solver unknown")

    # main loop

    def _budget_left(self, t0: float) -> bool:
        b = self.budget
        if b.selections is not None and self.selections >= b.selections:
            return False
        if b.seconds is not None and time.perf_counter() - t0 >= b.seconds:
            return False
        if b.instrs is not None and self.instrs >= b.instrs:
            return False
        return True

    def run(self) -> EngineResult:
        t0 = time.perf_counter()
        verdict = self._loop(t0)
        return EngineResult(verdict, self.selections, self.instrs, self.created,
                            (time.perf_counter() - t0) * 1000, self.log, self.solver.queries)

    def _loop(self, t0: float) -> Verdict:
        s0 = self.machine.initial_state()
        self._new(s0, None)
        self.enqueue(s0)
        while True:
            if not len(self.searcher) and not self.parked:
                if self.unknown_reasons:
                    return Verdict(UNKNOWN, "se", reason="solver: " + self.unknown_reasons[-1])
                if self.lost:
                    return Verdict(UNKNOWN, "se", reason="exploration bound")
                return Verdict(INFEASIBLE, "se", proof="exhausted")
            if not self.finite and not self.parked and not self.lost:
                return Verdict(INFEASIBLE, "se", proof="unreachable-cut")
            if not self._budget_left(t0):
                return Verdict(UNKNOWN, "se", reason="budget")
            st = self._pop()
            self.selections += 1
            self._emit(n=self.selections, state=st.sid, path=_path(st, self.prog), cut=st.cut_idx,
                       d=st.dist, i=st.since_new, w=weight(st.dist, st.since_new))
            if not st.checked:
                r = self._check(st)
                if r == UNSAT:
                    self._emit(event="unsat", state=st.sid)
                    continue
                if r != SAT:
                    if st.parked:
                        return Verdict(UNKNOWN, "se", reason="solver: " + self.unknown_reasons[-1])
                    self._park(st)
                    continue
            st.parked = False
            found = self._advance(st)
            if found is not None:
                v = self._generate(found)
                if v is not None:
                    return v

    def _advance(self, st: SymState) -> SymState | None:
        """Run ``st`` until it forks, exits or uses up its quantum. Returns a
        state that covers the pair, if one appeared."""
        m = self.machine
        n = 0
        while True:
            kind, payload = m.step(st)
            self.instrs += 1
            if kind == FORK:
                return self._fork(st, payload)
            # a division guard joins pc unchecked: the next fork or the final
            # model query rejects the state if the divisor is always zero
            for step in payload:
                self.observe(st, step)
            if st.covered:
                return st
            if kind == TRUNCATED:
                self._truncated(st)
                return None
            if kind == EXIT:
                return None
            n += 1
            if n >= self.budget.quantum:
                self.enqueue(st)
                return None

    def _fork(self, parent: SymState, payload) -> SymState | None:
        children = []
        fresh = payload[0][1].site not in self.covered_sites
        for child, step in payload:
            self._new(child, parent)
            self.observe(child, step, fresh)
            children.append(child)
        if parent.doomed:
            self._emit(event="prune", states=[c.sid for c in children], reason=f"{self.pair.var} redefined")
            return None
        live = []
        for child in children:
            if child.truncated and not child.covered:
                self._truncated(child)
                continue
            if self.lazy:
                child.checked = False
            else:
                r = self._check(child)
                if r == UNSAT:
                    self._emit(event="unsat", state=child.sid)
                    continue
                if r != SAT:
                    self._park(child)
                    continue
            if child.covered:
                return child
            live.append(child)
        self._emit(event="enqueue", states=[{"state": c.sid, "cut": c.cut_idx, "d": self._distance(c)} for c in live])
        self.enqueue_children(live)
        return None

    def _truncated(self, st: SymState) -> None:
        if not st.doomed and self._distance(st) != INF:
            self.lost = True
        self._emit(event="truncate", state=st.sid)

    def _generate(self, st: SymState) -> Verdict | None:
        """Solve the covering path and confirm it concretely."""
        r = self.solver.check(st.pc, want_model=True, inputs=self.prog.inputs)
        if r.status == UNSAT:
            self._emit(event="unsat", state=st.sid)
            return None
        if r.status != SAT:
            self.unknown_reasons.append(r.reason or "solver unknown")
            return None
        test = normalise_inputs(self.prog, r.model)
        if not replay_covers(self.prog, test, self.pair):
            self.unknown_reasons.append("generated input did not cover the pair")
            self._emit(event="validation-failed", state=st.sid, test=test)
            return None
        self._emit(event="covered", state=st.sid, test=test)
        return Verdict(FEASIBLE, "se", test=test)


def run_pair(prog_or_ctx, pair: DefUsePair, strategy: str = "cpgs", budget: Budget | None = None, seed: int = 0,
             tie_break: str = "random", lazy: bool = False, log: bool = False) -> EngineResult:
    """Search for an input covering ``pair``."""
    ctx = prog_or_ctx if isinstance(prog_or_ctx, ProgramContext) else ProgramContext(prog_or_ctx)
    return PairSearch(ctx, pair, strategy, budget, seed, tie_break, lazy, log).run()
