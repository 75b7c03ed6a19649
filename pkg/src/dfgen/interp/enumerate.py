"""Bounded path enumeration: the brute-force oracle for the engines.

Every feasible path within the unwind/depth bounds is explored depth-first
with the symbolic machine; infeasible prefixes are cut as soon as their
constraint turns unsatisfiable. Each finished path is scanned offline with
the last-definition monitor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dataflow import DefUsePair
from ..errors import PathBudgetExceeded
from ..frontend.ir import IRProgram
from ..graphs import ICFG
from ..verdict import FEASIBLE, INFEASIBLE, INFEASIBLE_WITHIN_BOUND, Verdict
from .coverage import measure_coverage
from .interpreter import Trace, normalise_inputs

DEFAULT_CAP = 10_000


@dataclass
class PathRecord:
    steps: list
    pc: tuple
    status: str  # return | abort | error | trap | truncated
    covered: frozenset = frozenset()


@dataclass
class Enumeration:
    verdicts: dict[DefUsePair, Verdict]
    paths: list[PathRecord] = field(default_factory=list)
    n_paths: int = 0
    truncated: bool = False
    bounds: tuple[int, int] = (0, 0)


def enumerate_paths(prog: IRProgram, pairs, unroll: int = 2, depth: int = 2, cap: int = DEFAULT_CAP,
                    keep_paths: bool = False, icfg: ICFG | None = None, solver=None) -> Enumeration:
    """Explore every path within ``(unroll, depth)``; raises
    PathBudgetExceeded past ``cap`` finished paths."""
    from ..symexec.machine import EXIT, FORK, GUARD, TRUNCATED, Machine
    from ..symexec.solver import SAT, UNSAT, Solver

    solver = solver or Solver()
    machine = Machine(prog, icfg, bounds=(unroll, depth), record=True)
    pairs = list(pairs)
    witness: dict[DefUsePair, dict] = {}
    out = Enumeration({}, bounds=(unroll, depth))
    stack = [machine.initial_state()]

    def finish(st, status: str, drop_last: bool = False) -> None:
        out.n_paths += 1
        if out.n_paths > cap:
            raise PathBudgetExceeded(f"more than {cap} paths within unwind={unroll}, depth={depth}")
        if status == "truncated":
            out.truncated = True
        steps = st.steps()
        if drop_last:
            steps = steps[:-1]
        cov = measure_coverage(prog, Trace(steps), pairs)
        fresh = [p for p in cov if p not in witness]
        if fresh:
            r = solver.check(st.pc, want_model=True, inputs=prog.inputs)
            if r.status != SAT:
                raise RuntimeError(f"satisfiable prefix became {r.status} at path end")
            test = normalise_inputs(prog, r.model)
            for p in fresh:
                witness[p] = test
        if keep_paths:
            out.paths.append(PathRecord(steps, st.pc, status, frozenset(cov)))

    while stack:
        st = stack.pop()
        while True:
            kind, payload = machine.step(st)
            if kind == FORK:
                live = []
                for child, _ in payload:
                    if solver.check(child.pc).status != UNSAT:
                        live.append(child)
                for child in reversed(live):
                    if child.status == "truncated":
                        finish(child, "truncated")
                    else:
                        stack.append(child)
                break
            if kind == GUARD and solver.check(st.pc).status == UNSAT:
                finish(st, "trap", drop_last=True)
                break
            if kind == EXIT:
                finish(st, st.status)
                break
            if kind == TRUNCATED:
                finish(st, "truncated")
                break

    for p in pairs:
        if p in witness:
            out.verdicts[p] = Verdict(FEASIBLE, "enumerate", test=witness[p], bounds=(unroll, depth))
        elif out.truncated:
            out.verdicts[p] = Verdict(INFEASIBLE_WITHIN_BOUND, "enumerate", proof="bounded-enumeration",
                                      bounds=(unroll, depth))
        else:
            out.verdicts[p] = Verdict(INFEASIBLE, "enumerate", proof="exhaustive-enumeration", bounds=(unroll, depth))
    return out
