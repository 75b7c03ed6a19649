"""Def-use coverage of concrete traces with the last-definition technique."""

from __future__ import annotations

from collections import defaultdict

from ..dataflow import DefUsePair
from ..frontend.ir import IRProgram
from .interpreter import DEFAULT_FUEL, Trace, run


def _use_cell(step, pair: DefUsePair):
    want = (None, pair.var) if pair.scope is None else (step.frame, pair.var)
    return want if want in step.uses else None


class CoverageMonitor:
    """Incremental monitor. Every write records the site that performed it;
    a use covers a pair when the last write to the cell it reads came from
    the pair's definition. Writes through pointers count as redefinitions."""

    def __init__(self, pairs):
        self.by_use = defaultdict(list)
        for p in pairs:
            self.by_use[p.use_site].append(p)
        self.remaining = sum(len(v) for v in self.by_use.values())
        self.last: dict = {}
        self.covered: dict[DefUsePair, int] = {}
        self.index = 0

    def feed(self, step) -> bool:
        """Process one step; True once every pair is covered."""
        if not step.ret:
            for p in self.by_use.get(step.site, ()):
                if p in self.covered:
                    continue
                c = _use_cell(step, p)
                if c is None or self.last.get(c) != p.def_site:
                    continue
                if p.edge is not None and step.decision != (p.edge == "T"):
                    continue
                self.covered[p] = self.index
                self.remaining -= 1
        for c in step.defs:
            self.last[c] = step.site
        self.index += 1
        return self.remaining == 0


def measure_coverage(prog: IRProgram, trace: Trace, pairs) -> dict[DefUsePair, int]:
    """Pairs covered by ``trace`` mapped to the index of the covering use step."""
    m = CoverageMonitor(pairs)
    for st in trace.steps:
        m.feed(st)
    return m.covered


def covers(prog: IRProgram, trace: Trace, pair: DefUsePair) -> bool:
    return pair in measure_coverage(prog, trace, [pair])


def replay_covers(prog: IRProgram, inputs: dict, pair: DefUsePair, fuel: int = DEFAULT_FUEL) -> bool:
    """Run ``inputs`` and report whether the pair gets covered; the run stops
    as soon as it is."""
    m = CoverageMonitor([pair])
    trace = run(prog, inputs, fuel, until=m.feed)
    if trace.status != "stopped":
        for st in trace.steps[m.index:]:
            m.feed(st)
    return pair in m.covered
