"""Per-program cache of the analyses every engine needs."""

from __future__ import annotations

from functools import cached_property

from .dataflow import DefUsePair, ReachingDefinitions, compute_pairs, cut_points, pair_ids
from .frontend.ir import IRProgram
from .graphs import ICFG, Distances


class ProgramContext:
    def __init__(self, prog: IRProgram, include_params: bool = False):
        self.prog = prog
        self.include_params = include_params
        self._cuts: dict[DefUsePair, list] = {}

    @cached_property
    def icfg(self) -> ICFG:
        return ICFG(self.prog)

    @cached_property
    def distances(self) -> Distances:
        return Distances(self.icfg)

    @cached_property
    def reaching(self) -> ReachingDefinitions:
        return ReachingDefinitions(self.prog, self.icfg)

    @cached_property
    def pairs(self) -> list[DefUsePair]:
        return compute_pairs(self.prog, self.icfg, self.include_params, self.reaching)

    @cached_property
    def ids(self) -> dict[DefUsePair, str]:
        return pair_ids(self.pairs)

    def pair(self, pid: str) -> DefUsePair:
        for p, i in self.ids.items():
            if i == pid:
                return p
        raise KeyError(pid)

    def cut_points(self, pair: DefUsePair) -> list:
        if pair not in self._cuts:
            self._cuts[pair] = cut_points(self.icfg, pair)
        return self._cuts[pair]

    def describe(self, pair: DefUsePair) -> dict:
        """JSON-ready description of ``pair``."""
        prog = self.prog

        def loc(site):
            return {"file": prog.file_of(site) or "<input>", "line": prog.line_of(site)}

        return {
            "id": self.ids[pair], "def": loc(pair.def_site), "use": loc(pair.use_site), "var": pair.var,
            "kind": pair.kind, "edge": pair.edge,
            "cut_points": [prog.line_of(s) for s in self.cut_points(pair)],
        }
