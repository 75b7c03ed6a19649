"""Search-strategy comparison over a corpus."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

from .context import ProgramContext
from .symexec import Budget, run_pair
from .verdict import FEASIBLE


@dataclass
class StrategyStats:
    strategy: str
    runs: int = 0
    covered: int = 0
    selections: list[int] = field(default_factory=list)  # per covered run

    @property
    def median_selections(self) -> float:
        return statistics.median(self.selections) if self.selections else float("nan")

    def row(self) -> list:
        return [self.strategy, self.runs, self.covered, self.median_selections]


def compare_strategies(programs, strategies, seeds, budget: Budget | None = None, pairs=None) -> dict[str, StrategyStats]:
    """Run every strategy on every (program, pair, seed). ``programs`` is a
    list of (name, IRProgram); ``pairs`` optionally maps a name to the pairs to
    use."""
    budget = budget or Budget(selections=300)
    stats = {s: StrategyStats(s) for s in strategies}
    for name, prog in programs:
        ctx = ProgramContext(prog)
        chosen = ctx.pairs if pairs is None or name not in pairs else pairs[name]
        for pair in chosen:
            for s in strategies:
                for seed in seeds:
                    r = run_pair(ctx, pair, s, budget, seed=seed)
                    st = stats[s]
                    st.runs += 1
                    if r.verdict.status == FEASIBLE:
                        st.covered += 1
                        st.selections.append(r.selections)
    return stats


BENCH_COLUMNS = ["strategy", "runs", "covered", "median_selections"]
