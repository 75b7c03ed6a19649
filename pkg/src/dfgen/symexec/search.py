"""Search strategies: which pending state to execute next."""

from __future__ import annotations

import heapq
import random

from ..errors import EmptyWorklist
from ..graphs import INF
from .machine import SymState

STRATEGIES = ("dfs", "rss", "rss-md2u", "sdgs", "cpgs")


def weight(d: float, i: int) -> float:
    """Closeness of a state to its next cut point plus a bonus for recent
    new coverage. Zero distances count as one; unreachable adds nothing."""
    dw = 0.0 if d == INF else 1.0 / max(d, 1) ** 2
    return dw + 1.0 / max(i, 1) ** 2


class Searcher:
    name = ""

    def __init__(self, engine, rng: random.Random):
        self.engine = engine
        self.rng = rng

    def push(self, st: SymState) -> None:
        raise NotImplementedError

    def push_children(self, children: list[SymState]) -> None:
        for c in children:
            self.push(c)

    def pop(self) -> SymState | None:
        raise NotImplementedError

    def select(self) -> SymState:
        st = self.pop()
        if st is None:
            raise EmptyWorklist(f"{self.name}: no pending states")
        return st

    def __len__(self) -> int:
        raise NotImplementedError

    def states(self) -> list[SymState]:
        raise NotImplementedError


class _ListSearcher(Searcher):
    def __init__(self, engine, rng):
        super().__init__(engine, rng)
        self.items: list[SymState] = []

    def push(self, st):
        self.items.append(st)

    def __len__(self):
        return len(self.items)

    def states(self):
        return list(self.items)

    def _take(self, i: int) -> SymState:
        items = self.items
        items[i], items[-1] = items[-1], items[i]
        return items.pop()


class DFS(_ListSearcher):
    name = "dfs"

    def push_children(self, children):
        # true side is explored first
        for c in reversed(children):
            self.push(c)

    def pop(self):
        return self.items.pop() if self.items else None


class RSS(_ListSearcher):
    """Uniformly random state selection."""

    name = "rss"

    def pop(self):
        if not self.items:
            return None
        return self._take(self.rng.randrange(len(self.items)))


class COS(_ListSearcher):
    """Coverage-optimised search: alternates uniform random picks with picks
    weighted by the inverse square of the distance to uncovered code."""

    name = "rss-md2u"

    def __init__(self, engine, rng):
        super().__init__(engine, rng)
        self.turn = 0
        self._table = None
        self._version = -1

    def _md2u(self, st: SymState) -> float:
        eng = self.engine
        if self._version != len(eng.covered_sites):
            uncovered = [s for s in eng.reachable if s not in eng.covered_sites]
            self._table = eng.dist.to_any(uncovered) if uncovered else {}
            self._version = len(eng.covered_sites)
        return eng.dist.stack_distance(self._table, st.stack())

    def pop(self):
        if not self.items:
            return None
        self.turn += 1
        if self.turn % 2:
            return self._take(self.rng.randrange(len(self.items)))
        ws = []
        for st in self.items:
            d = self._md2u(st)
            ws.append(1e-6 if d == INF else 1.0 / max(d, 1) ** 2)
        r = self.rng.random() * sum(ws)
        for i, w in enumerate(ws):
            r -= w
            if r <= 0:
                return self._take(i)
        return self._take(len(ws) - 1)


class _HeapSearcher(Searcher):
    def __init__(self, engine, rng):
        super().__init__(engine, rng)
        self.heap: list = []
        self.seq = 0

    def _key(self, st: SymState) -> tuple:
        raise NotImplementedError

    def push(self, st):
        self.seq += 1
        heapq.heappush(self.heap, (*self._key(st), self.seq, st))

    def pop(self):
        return heapq.heappop(self.heap)[-1] if self.heap else None

    def __len__(self):
        return len(self.heap)

    def states(self):
        return [e[-1] for e in self.heap]

    def _tie(self, st: SymState) -> float:
        return st.created if self.engine.tie_break == "paper" else self.rng.random()


class SDGS(_HeapSearcher):
    """Shortest distance to the definition, then to the use once the
    definition is live."""

    name = "sdgs"

    def _key(self, st):
        pair = self.engine.pair
        target = pair.use_site if st.def_live else pair.def_site
        return (self.engine.dist.from_stack(st.stack(), target), self._tie(st))


class CPGS(_HeapSearcher):
    """Cut-point guided search: furthest cut point first, then the weight of
    distance to the next cut point and steps since new coverage."""

    name = "cpgs"

    def _key(self, st):
        return (-st.cut_idx, -weight(st.dist, st.since_new), self._tie(st))


def make_searcher(name: str, engine, rng: random.Random) -> Searcher:
    table = {"dfs": DFS, "rss": RSS, "rss-md2u": COS, "cos": COS, "sdgs": SDGS, "cpgs": CPGS}
    try:
        return table[name](engine, rng)
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; expected one of {', '.join(STRATEGIES)}") from None
