"""Reaching definitions, def-use pairs and cut points."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

from .errors import NoDominator
from .frontend import ir
from .frontend.ir import IRProgram, Site, is_temp
from .graphs import ICFG

VarKey = tuple  # (scope, name); scope is the owning function or None for globals
Definition = tuple  # (Site, VarKey)


@dataclass(frozen=True)
class DefUsePair:
    def_site: Site
    use_site: Site
    var: str
    scope: str | None  # owning function, None for a global
    edge: str | None = None  # "T"/"F" for p-uses

    @property
    def kind(self) -> str:
        return "p-use" if self.edge else "c-use"

    @property
    def intra(self) -> bool:
        return self.def_site.func == self.use_site.func

    @property
    def key(self) -> VarKey:
        return (self.scope, self.var)

    def sort_key(self):
        return (self.def_site, self.use_site, self.var, self.scope or "", self.edge or "")

    def describe(self, prog: IRProgram) -> str:
        e = f"{self.edge}" if self.edge else ""
        return f"(l{prog.line_of(self.def_site)}, l{prog.line_of(self.use_site)}{e}, {self.var})"


def var_key(prog: IRProgram, func: str, name: str) -> VarKey:
    return (prog.scope(func, name), name)


class ReachingDefinitions:
    """Forward may-analysis over the ICFG.

    Local facts bypass calls along the call-to-return edge; global facts flow
    through the callee. The variable assigned by a call is defined at the call
    site once the callee returns.
    """

    def __init__(self, prog: IRProgram, icfg: ICFG | None = None):
        self.prog = prog
        self.icfg = icfg or ICFG(prog)
        self.IN: dict[Site, frozenset] = {}
        self.OUT: dict[Site, frozenset] = {}
        self._solve()

    def _gen_kill(self, s: Site):
        ins = self.prog.instr(s)
        w = ins.writes()
        if w is None or ins.kind == ir.CALL:
            return None
        return var_key(self.prog, s.func, w)

    def _transfer(self, s: Site, facts: frozenset) -> frozenset:
        k = self._gen_kill(s)
        if k is None:
            return facts
        return frozenset(d for d in facts if d[1] != k) | {(s, k)}

    def _in(self, s: Site) -> frozenset:
        prog, icfg = self.prog, self.icfg
        facts = set()
        if s.index == 0:
            for c in icfg.callsites.get(s.func, ()):
                facts.update(d for d in self.IN.get(c, ()) if d[1][0] is None)
        for p in self._intra_pred[s]:
            ins = prog.instr(p)
            if ins.kind == ir.CALL:
                part = {d for d in self.IN.get(p, ()) if d[1][0] == p.func}
                for r in icfg.returns_of(ins.callee):
                    part.update(d for d in self.OUT.get(r, ()) if d[1][0] is None)
                if ins.dst is not None:
                    k = var_key(prog, p.func, ins.dst)
                    part = {d for d in part if d[1] != k} | {(p, k)}
                facts |= part
            else:
                facts.update(self.OUT.get(p, ()))
        return frozenset(facts)

    def _solve(self) -> None:
        self._intra_pred = defaultdict(list)
        for s, outs in self.icfg.intra.items():
            for t, _ in outs:
                self._intra_pred[t].append(s)
        dependents = defaultdict(set)
        for s, outs in self.icfg.intra.items():
            ins = self.prog.instr(s)
            for t, _ in outs:
                dependents[s].add(t)
            if ins.kind == ir.CALL:
                dependents[s].add(Site(ins.callee, 0))
                for r in self.icfg.returns_of(ins.callee):
                    dependents[r].add(Site(s.func, s.index + 1))
        work = deque(self.icfg.intra.keys())
        queued = set(work)
        while work:
            s = work.popleft()
            queued.discard(s)
            new_in = self._in(s)
            new_out = self._transfer(s, new_in)
            changed = new_in != self.IN.get(s) or new_out != self.OUT.get(s)
            self.IN[s], self.OUT[s] = new_in, new_out
            if changed:
                for t in dependents[s]:
                    if t not in queued:
                        queued.add(t)
                        work.append(t)

    def reaching(self, s: Site, key: VarKey) -> list[Site]:
        return sorted(d for d, k in self.IN.get(s, ()) if k == key)


def is_objective_var(prog: IRProgram, func: str, name: str) -> bool:
    return not is_temp(name) and prog.var_type(func, name) in ("int", "bool")


def compute_pairs(prog: IRProgram, icfg: ICFG | None = None, include_params: bool = False,
                  rd: ReachingDefinitions | None = None) -> list[DefUsePair]:
    """All c-use and p-use pairs over scalar locals and globals, sorted.

    Definitions made by parameter binding and input declarations are not
    objectives unless ``include_params`` is set; later assignments to such
    variables are.
    """
    icfg = icfg or ICFG(prog)
    rd = rd or ReachingDefinitions(prog, icfg)
    reachable = icfg.reachable()
    pairs = set()
    for s in icfg.nodes():
        if s not in reachable:
            continue
        ins = prog.instr(s)
        for name in dict.fromkeys(ins.reads()):
            if not is_objective_var(prog, s.func, name):
                continue
            key = var_key(prog, s.func, name)
            for d in rd.reaching(s, key):
                if d not in reachable:
                    continue
                if not include_params and prog.instr(d).kind in (ir.PARAM, ir.INPUT):
                    continue
                if ins.kind == ir.BRANCH:
                    pairs.add(DefUsePair(d, s, name, key[0], "T"))
                    pairs.add(DefUsePair(d, s, name, key[0], "F"))
                else:
                    pairs.add(DefUsePair(d, s, name, key[0]))
    return sorted(pairs, key=DefUsePair.sort_key)


def pair_ids(pairs: list[DefUsePair]) -> dict[DefUsePair, str]:
    return {p: f"du{i + 1}" for i, p in enumerate(pairs)}


def find_pair(prog: IRProgram, pairs, def_line: int, use_line: int, var: str, edge: str | None = None) -> DefUsePair:
    """Look a pair up by source lines; the last instruction of a multi-instruction
    line is taken for definitions."""
    hits = [p for p in pairs if prog.line_of(p.def_site) == def_line and prog.line_of(p.use_site) == use_line
            and p.var == var and p.edge == edge]
    if not hits:
        raise KeyError((def_line, use_line, var, edge))
    return hits[0]


def branch_successor(prog: IRProgram, pair: DefUsePair) -> Site:
    ins = prog.instr(pair.use_site)
    return Site(pair.use_site.func, ins.targets[0 if pair.edge == "T" else 1])


def _include(icfg: ICFG, n: Site) -> bool:
    prog = icfg.prog
    if n.index == prog.functions[n.func].body_entry:
        return True
    if prog.instr(n).kind == ir.CALL:
        return True
    preds = icfg.predecessors_super(n)
    if len(preds) > 1:
        return True
    return len(preds) == 1 and len(icfg.supergraph()[preds[0]]) == 2


def cut_points(icfg: ICFG, pair: DefUsePair) -> list[Site]:
    """Ordered sites that every covering path visits in sequence.

    The list starts with dominators of the definition, then the definition,
    then dominators of the use that do not dominate the definition, then the
    use; a p-use ends with the successor on the required edge. Only entry,
    call, join and branch-target nodes are kept from the dominator chains.
    """
    prog = icfg.prog
    idom = icfg.idoms()
    ld, lu = pair.def_site, pair.use_site
    for n in (ld, lu):
        if n not in idom:
            raise NoDominator(f"{n} is unreachable")
    entry_fn = prog.functions[prog.entry]

    def in_prologue(n: Site) -> bool:
        return n.func == prog.entry and n.index < entry_fn.body_entry

    chain = []
    x = idom[ld]
    while x is not None:
        chain.append(x)
        x = idom[x]
    prefix = [n for n in reversed(chain) if not in_prologue(n) and _include(icfg, n)]
    chain = []
    x = idom[lu]
    while x is not None and x != ld and not icfg.dominates(x, ld):
        chain.append(x)
        x = idom[x]
    middle = [n for n in reversed(chain) if not in_prologue(n) and _include(icfg, n)]
    seq = prefix + [ld] + middle + [lu]
    if pair.edge:
        seq.append(branch_successor(prog, pair))
    out = []
    for n in seq:
        if not out or out[-1] != n:
            out.append(n)
    return out


def cut_point_lines(icfg: ICFG, pair: DefUsePair) -> list[int]:
    lines = []
    for s in cut_points(icfg, pair):
        ln = icfg.prog.line_of(s)
        if not lines or lines[-1] != ln:
            lines.append(ln)
    return lines
