"""Combined driver: symbolic execution first, then the bounded checker, under
an escalating per-pair budget.

Budgets are counted in abstract units. One unit buys ``se_selections_per_unit``
state selections of symbolic execution; when ``seconds_per_unit`` is set it
also caps wall-clock time for both engines. Selection budgets keep runs
reproducible, which wall-clock budgets cannot.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .checker import CheckBounds, bmc_check, choose_bounds, instrument
from .checker.bounds import BudgetExhausted
from .context import ProgramContext
from .frontend.ir import IRProgram
from .symexec import Budget, run_pair
from .verdict import FEASIBLE, INFEASIBLE, INFEASIBLE_WITHIN_BOUND, UNKNOWN, Verdict

DEFAULT_SCHEDULE = (10, 30, 90, 300)
ENGINES = ("se", "checker")


@dataclass
class CampaignConfig:
    strategy: str = "cpgs"
    schedule: tuple[int, ...] = DEFAULT_SCHEDULE
    se_selections_per_unit: int = 10
    seconds_per_unit: float | None = None
    check_timeout_ms: int = 30_000
    bounds: str = "fixed"  # fixed | auto
    unwind: int = 2
    depth: int = 2
    bounds_cap: int = 8
    checker_mode: str = "monolithic"
    checker_first: bool = False
    bounds_exact: bool = False
    cross_check: bool = True
    engines: tuple[str, ...] = ENGINES
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        self.schedule = tuple(int(u) for u in self.schedule)
        if not self.schedule or any(u <= 0 for u in self.schedule):
            raise ValueError("budget schedule must be a non-empty list of positive units")
        if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
            raise ValueError("budget schedule must be strictly increasing")
        if self.bounds not in ("fixed", "auto"):
            raise ValueError(f"unknown bounds policy {self.bounds!r}")
        self.engines = tuple(self.engines)
        if not self.engines or any(e not in ENGINES for e in self.engines):
            raise ValueError(f"engines must be drawn from {ENGINES}")
        CheckBounds(self.unwind, self.depth)

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy, "schedule": list(self.schedule),
            "se_selections_per_unit": self.se_selections_per_unit, "seconds_per_unit": self.seconds_per_unit,
            "check_timeout_ms": self.check_timeout_ms, "bounds": self.bounds, "unwind": self.unwind,
            "depth": self.depth, "checker_mode": self.checker_mode, "checker_first": self.checker_first,
            "bounds_exact": self.bounds_exact, "engines": list(self.engines), "seed": self.seed,
        }


@dataclass
class PairOutcome:
    pid: str
    verdict: Verdict
    time_ms: float = 0.0
    steps: int = 0
    resolved_round: int | None = None
    attempts: list = field(default_factory=list)  # {round, engine, status, time_ms, steps}


@dataclass
class CampaignReport:
    program: str
    pairs: list  # pair descriptors, same order as ``outcomes``
    outcomes: dict[str, PairOutcome]
    config: dict
    rounds: list = field(default_factory=list)
    inconsistencies: list = field(default_factory=list)
    total_time_ms: float = 0.0
    bounds: tuple[int, int] | None = None
    bounds_search_exhausted: bool = False

    def count(self, status: str) -> int:
        return sum(1 for o in self.outcomes.values() if o.verdict.status == status)

    @property
    def n_feasible(self) -> int:
        return self.count(FEASIBLE)

    @property
    def n_infeasible(self) -> int:
        return self.count(INFEASIBLE)

    @property
    def n_within_bound(self) -> int:
        return self.count(INFEASIBLE_WITHIN_BOUND)

    @property
    def n_unknown(self) -> int:
        return self.count(UNKNOWN)

    def coverage(self) -> float:
        return coverage(self)

    def feasible_ids(self) -> set[str]:
        return {pid for pid, o in self.outcomes.items() if o.verdict.status == FEASIBLE}


def coverage_rate(n_feasible: int, n_infeasible: int, n_objectives: int) -> float:
    """Covered share of the pairs not known to be infeasible. With nothing
    left to cover the rate is 1."""
    denom = n_objectives - n_infeasible
    if denom <= 0:
        return 1.0
    return n_feasible / denom


def coverage(report: CampaignReport) -> float:
    infeasible = report.n_infeasible
    if report.config.get("bounds_exact"):
        infeasible += report.n_within_bound
    return coverage_rate(report.n_feasible, infeasible, len(report.outcomes))


# engines


_WORKER_CTX: ProgramContext | None = None


def _init_worker(prog: IRProgram) -> None:
    global _WORKER_CTX
    _WORKER_CTX = ProgramContext(prog)


def _pair_seed(seed: int, index: int, rnd: int) -> int:
    return (seed * 1_000_003 + index * 7919 + rnd) & 0x7FFFFFFF


def _attempt(ctx: ProgramContext, task: tuple) -> tuple[str, str, Verdict, float, int]:
    pid, engine, index, rnd, units, cfg, bounds = task
    pair = ctx.pair(pid)
    secs = None if cfg.seconds_per_unit is None else units * cfg.seconds_per_unit
    t0 = time.perf_counter()
    try:
        if engine == "se":
            budget = Budget(selections=units * cfg.se_selections_per_unit, seconds=secs)
            r = run_pair(ctx, pair, cfg.strategy, budget, seed=_pair_seed(cfg.seed, index, rnd))
            steps = r.selections
        else:
            timeout = cfg.check_timeout_ms if secs is None else max(1, int(secs * 1000))
            r = bmc_check(instrument(ctx.prog, pair), bounds, timeout_ms=timeout, mode=cfg.checker_mode)
            steps = r.paths_explored
        verdict = r.verdict
    except Exception as e:  # an engine failure must not sink the campaign
        verdict = Verdict(UNKNOWN, engine, reason=f"{type(e).__name__}: {e}")
        steps = 0
    return pid, engine, verdict, (time.perf_counter() - t0) * 1000, steps


def _worker(task: tuple):
    return _attempt(_WORKER_CTX, task)


class _Runner:
    def __init__(self, ctx: ProgramContext, jobs: int):
        self.ctx = ctx
        self.pool = None
        if jobs > 1:
            self.pool = ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(ctx.prog,))

    def map(self, tasks: list) -> list:
        if self.pool is None or len(tasks) < 2:
            return [_attempt(self.ctx, t) for t in tasks]
        return list(self.pool.map(_worker, tasks))

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()


# verdict merging


def _rank(v: Verdict) -> int:
    return {FEASIBLE: 3, INFEASIBLE: 3, INFEASIBLE_WITHIN_BOUND: 2, UNKNOWN: 1}[v.status]


def _better(old: Verdict, new: Verdict) -> Verdict:
    """Resolved verdicts stick; otherwise keep the more informative one."""
    if old.resolved:
        return old
    return new if _rank(new) >= _rank(old) else old


def cross_check(se_results: dict, mc_results: dict) -> list[dict]:
    """Conflicts between engine verdicts on the same pairs. A Feasible verdict
    against an exact Infeasible one is a hard inconsistency; against an
    InfeasibleWithinBound one it only suggests the bound was too small."""
    out = []
    for pid in sorted(set(se_results) & set(mc_results), key=_natural):
        a, b = se_results[pid], mc_results[pid]
        for x, y in ((a, b), (b, a)):
            if x.status != FEASIBLE:
                continue
            if y.status == INFEASIBLE:
                kind = "hard"
            elif y.status == INFEASIBLE_WITHIN_BOUND:
                kind = "bound-suspect"
            else:
                continue
            out.append({"pair": pid, "kind": kind, "feasible": x.to_dict(), "infeasible": y.to_dict()})
    return out


def _natural(pid: str):
    digits = "".join(ch for ch in pid if ch.isdigit())
    return (int(digits) if digits else 0, pid)


# campaign


def run_campaign(prog: IRProgram | ProgramContext, pairs=None, cfg: CampaignConfig | None = None,
                 name: str = "program") -> CampaignReport:
    """Run the escalating schedule over ``pairs`` (all pairs by default)."""
    cfg = cfg or CampaignConfig()
    ctx = prog if isinstance(prog, ProgramContext) else ProgramContext(prog)
    pairs = list(ctx.pairs if pairs is None else pairs)
    ids = [ctx.ids[p] for p in pairs]
    t0 = time.perf_counter()

    exhausted = False
    bounds = CheckBounds(cfg.unwind, cfg.depth)
    if cfg.bounds == "auto" and "checker" in cfg.engines:
        try:
            bounds = choose_bounds(ctx.prog, pairs, budget=max(1.0, cfg.check_timeout_ms / 1000),
                                   cap=cfg.bounds_cap, depth=cfg.depth)
        except BudgetExhausted as e:
            bounds, exhausted = e.best, True

    outcomes = {pid: PairOutcome(pid, Verdict(UNKNOWN, "none", reason="not attempted")) for pid in ids}
    index = {pid: i for i, pid in enumerate(ids)}
    last_by_engine: dict[str, dict[str, Verdict]] = {e: {} for e in ENGINES}
    order = [e for e in (("checker", "se") if cfg.checker_first else ("se", "checker")) if e in cfg.engines]
    runner = _Runner(ctx, cfg.jobs)
    rounds = []
    try:
        for rnd, units in enumerate(cfg.schedule, start=1):
            for engine in order:
                todo = [pid for pid in ids if not outcomes[pid].verdict.resolved and _worth(engine, last_by_engine,
                                                                                            pid)]
                tasks = [(pid, engine, index[pid], rnd, units, cfg, bounds) for pid in todo]
                for pid, eng, verdict, ms, steps in runner.map(tasks):
                    o = outcomes[pid]
                    last_by_engine[eng][pid] = verdict
                    o.attempts.append({"round": rnd, "engine": eng, "status": verdict.status,
                                       "time_ms": round(ms, 3), "steps": steps})
                    o.time_ms += ms
                    o.steps += steps
                    o.verdict = _better(o.verdict, verdict)
                    if o.verdict.resolved and o.resolved_round is None:
                        o.resolved_round = rnd
            snapshot = CampaignReport(name, [], outcomes, cfg.as_dict())
            rounds.append({"round": rnd, "units": units, "feasible": snapshot.n_feasible,
                           "infeasible": snapshot.n_infeasible, "within_bound": snapshot.n_within_bound,
                           "unknown": snapshot.n_unknown, "coverage": coverage(snapshot)})
            if all(o.verdict.resolved for o in outcomes.values()):
                break
        inconsistencies = []
        if cfg.cross_check and set(order) == set(ENGINES):
            inconsistencies = _cross_validate(runner, ids, index, outcomes, last_by_engine, cfg, bounds)
    finally:
        runner.close()

    config = cfg.as_dict()
    config["bounds_used"] = list(bounds.as_tuple())
    return CampaignReport(name, [ctx.describe(p) for p in pairs], outcomes, config, rounds, inconsistencies,
                          (time.perf_counter() - t0) * 1000, bounds.as_tuple(), exhausted)


def _worth(engine: str, last: dict, pid: str) -> bool:
    """A checker verdict other than Unknown is final at fixed bounds, so the
    checker is not asked again; Unknown (a timeout) is retried with more time."""
    if engine != "checker":
        return True
    prev = last["checker"].get(pid)
    return prev is None or prev.status == UNKNOWN


def _cross_validate(runner, ids, index, outcomes, last, cfg, bounds) -> list[dict]:
    """Give the engine that did not run on a pair one attempt at the final
    budget, then compare the two verdicts."""
    units = cfg.schedule[-1]
    rnd = len(cfg.schedule) + 1
    tasks = []
    for pid in ids:
        for engine in ENGINES:
            if pid not in last[engine]:
                tasks.append((pid, engine, index[pid], rnd, units, cfg, bounds))
    for pid, eng, verdict, ms, steps in runner.map(tasks):
        last[eng][pid] = verdict
        outcomes[pid].attempts.append({"round": "cross-check", "engine": eng, "status": verdict.status,
                                       "time_ms": round(ms, 3), "steps": steps})
    return cross_check(last["se"], last["checker"])


def default_jobs() -> int:
    return max(1, min(4, os.cpu_count() or 1))
