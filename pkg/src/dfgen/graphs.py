"""Interprocedural control-flow graph, dominators, loops and distances."""

from __future__ import annotations

import heapq
import math
import threading
from collections import defaultdict, deque
from dataclasses import dataclass, field

from .errors import NoDominator
from .frontend import ir
from .frontend.ir import IRProgram, Site, is_temp
from .frontend.printer import format_instr

INF = math.inf


def dominator_tree(succ: dict, root) -> dict:
    """Immediate dominators by Lengauer-Tarjan with path compression.

    ``succ`` maps each node to an iterable of successors. Unreachable nodes are
    absent from the result; the root maps to ``None``.
    """
    dfnum: dict = {root: 0}
    vertex = [root]
    parent: dict = {}
    stack = [(root, iter(succ.get(root, ())))]
    while stack:
        node, it = stack[-1]
        for nxt in it:
            if nxt not in dfnum:
                dfnum[nxt] = len(vertex)
                vertex.append(nxt)
                parent[nxt] = node
                stack.append((nxt, iter(succ.get(nxt, ()))))
                break
        else:
            stack.pop()
    preds: dict = defaultdict(list)
    for v in vertex:
        for w in succ.get(v, ()):
            preds[w].append(v)

    semi = {v: dfnum[v] for v in vertex}
    label = {v: v for v in vertex}
    ancestor: dict = {}
    idom: dict = {}
    bucket: dict = defaultdict(list)

    def evaluate(v):
        if v not in ancestor:
            return v
        path = []
        x = v
        while ancestor[x] in ancestor:
            path.append(x)
            x = ancestor[x]
        while path:
            x = path.pop()
            a = ancestor[x]
            if semi[label[a]] < semi[label[x]]:
                label[x] = label[a]
            ancestor[x] = ancestor[a]
        return label[v]

    for w in reversed(vertex[1:]):
        for v in preds[w]:
            u = evaluate(v)
            if semi[u] < semi[w]:
                semi[w] = semi[u]
        bucket[vertex[semi[w]]].append(w)
        p = parent[w]
        ancestor[w] = p
        for v in bucket.pop(p, ()):
            u = evaluate(v)
            idom[v] = u if semi[u] < semi[v] else p
    for w in vertex[1:]:
        if idom[w] != vertex[semi[w]]:
            idom[w] = idom[idom[w]]
    idom[root] = None
    return idom


@dataclass
class LoopInfo:
    back_edges: set[tuple[int, int]] = field(default_factory=set)
    body: dict[int, frozenset[int]] = field(default_factory=dict)  # header -> nodes

    def exits(self, u: int, v: int) -> list[int]:
        """Headers of loops left by the edge u -> v."""
        return [h for h, b in self.body.items() if u in b and v not in b]


class ICFG:
    """Interprocedural CFG over IR sites.

    Intra-procedural edges keep the call fall-through (call -> next
    instruction). The supergraph used for dominance replaces it by a call
    edge into the callee and return edges back to every return site.
    """

    def __init__(self, prog: IRProgram):
        self.prog = prog
        self.intra: dict[Site, list[tuple[Site, str]]] = {}
        self.callsites: dict[str, list[Site]] = defaultdict(list)
        self.calls: dict[str, set[str]] = defaultdict(set)
        for f in prog.functions.values():
            for i, ins in enumerate(f.instrs):
                s = Site(f.name, i)
                out = []
                if ins.kind == ir.BRANCH:
                    out = [(Site(f.name, ins.targets[0]), "true"), (Site(f.name, ins.targets[1]), "false")]
                else:
                    out = [(Site(f.name, j), "seq") for j in f.successors(i)]
                self.intra[s] = out
                if ins.kind == ir.CALL:
                    self.callsites[ins.callee].append(s)
                    self.calls[f.name].add(ins.callee)
        self._super: dict[Site, list[Site]] | None = None
        self._idom: dict | None = None
        self._loops: dict[str, LoopInfo] = {}
        self._lock = threading.Lock()

    # structure

    def nodes(self):
        return self.intra.keys()

    def successors(self, s: Site) -> list[Site]:
        return [t for t, _ in self.intra[s]]

    def returns_of(self, func: str) -> list[Site]:
        f = self.prog.functions[func]
        return [Site(func, i) for i, ins in enumerate(f.instrs) if ins.kind == ir.RETURN]

    def supergraph(self) -> dict[Site, list[Site]]:
        if self._super is None:
            sg: dict[Site, list[Site]] = {}
            for s, outs in self.intra.items():
                ins = self.prog.instr(s)
                if ins.kind == ir.CALL:
                    sg[s] = [Site(ins.callee, 0)]
                elif ins.kind == ir.RETURN:
                    sg[s] = [Site(c.func, c.index + 1) for c in self.callsites.get(s.func, ())]
                else:
                    sg[s] = [t for t, _ in outs]
            self._super = sg
        return self._super

    def predecessors_super(self, s: Site) -> list[Site]:
        sg = self.supergraph()
        if not hasattr(self, "_spred"):
            pred = defaultdict(list)
            for a, outs in sg.items():
                for b in outs:
                    pred[b].append(a)
            self._spred = pred
        return self._spred.get(s, [])

    def idoms(self) -> dict:
        if self._idom is None:
            self._idom = dominator_tree(self.supergraph(), self.prog.entry_site())
        return self._idom

    def immediate_dominator(self, n: Site) -> Site:
        idom = self.idoms()
        if n not in idom or idom[n] is None:
            raise NoDominator(f"{n} has no immediate dominator")
        return idom[n]

    def dominates(self, a: Site, b: Site) -> bool:
        idom = self.idoms()
        if b not in idom:
            return False
        x = b
        while x is not None:
            if x == a:
                return True
            x = idom[x]
        return False

    def reachable(self) -> set[Site]:
        return set(self.idoms())

    # loops

    def loops(self, func: str) -> LoopInfo:
        with self._lock:
            if func not in self._loops:
                self._loops[func] = self._find_loops(func)
            return self._loops[func]

    def _find_loops(self, func: str) -> LoopInfo:
        f = self.prog.functions[func]
        info = LoopInfo()
        state = {}
        stack = [(0, iter(f.successors(0)))]
        state[0] = 1
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if state.get(nxt) == 1:
                    info.back_edges.add((node, nxt))
                elif nxt not in state:
                    state[nxt] = 1
                    stack.append((nxt, iter(f.successors(nxt))))
                    break
            else:
                state[node] = 2
                stack.pop()
        preds = defaultdict(list)
        for i in range(len(f.instrs)):
            for j in f.successors(i):
                preds[j].append(i)
        bodies: dict[int, set[int]] = defaultdict(set)
        for u, h in info.back_edges:
            body = bodies[h]
            body.add(h)
            work = [u]
            while work:
                x = work.pop()
                if x in body:
                    continue
                body.add(x)
                work.extend(preds[x])
        info.body = {h: frozenset(b) for h, b in bodies.items()}
        return info

    def is_loop_free(self) -> bool:
        return not any(self.loops(f).back_edges for f in self.prog.functions) and not self.recursive_functions()

    # call graph

    def recursive_functions(self) -> set[str]:
        out = set()
        for f in self.prog.functions:
            seen, work = set(), list(self.calls.get(f, ()))
            while work:
                g = work.pop()
                if g == f:
                    out.add(f)
                    break
                if g not in seen:
                    seen.add(g)
                    work.extend(self.calls.get(g, ()))
        return out

    def call_height(self) -> int:
        """Longest call chain from the entry, ignoring recursive edges."""
        memo: dict[str, int] = {}

        def h(f, active):
            if f in memo:
                return memo[f]
            best = 0
            for g in self.calls.get(f, ()):
                if g not in active:
                    best = max(best, 1 + h(g, active | {g}))
            memo[f] = best
            return best

        return h(self.prog.entry, frozenset({self.prog.entry}))

    def to_dot(self) -> str:
        lines = ["digraph icfg {", "  node [shape=box, fontname=monospace];"]
        for f in self.prog.functions.values():
            lines.append(f'  subgraph "cluster_{f.name}" {{')
            lines.append(f'    label="{f.name}";')
            labels = {t: f"L{t}" for t in range(len(f.instrs))}
            for i, ins in enumerate(f.instrs):
                text = f"param {ins.dst}" if ins.kind == ir.PARAM else format_instr(ins, labels)
                text = text.replace('"', '\\"')
                lines.append(f'    "{f.name}:{i}" [label="{i} (l{ins.line}) {text}"];')
            lines.append("  }")
        for s, outs in self.intra.items():
            for t, kind in outs:
                attr = "" if kind == "seq" else f' [label="{kind[0].upper()}"]'
                lines.append(f'  "{s}" -> "{t}"{attr};')
        for callee, sites in self.callsites.items():
            for c in sites:
                lines.append(f'  "{c}" -> "{callee}:0" [style=dashed];')
                for r in self.returns_of(callee):
                    lines.append(f'  "{r}" -> "{c.func}:{c.index + 1}" [style=dotted];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def callgraph_distance(icfg: ICFG, a: str, b: str) -> float:
    """Fewest call edges from function ``a`` to function ``b``."""
    if a == b:
        return 0
    seen = {a}
    q = deque([(a, 0)])
    while q:
        f, d = q.popleft()
        for g in sorted(icfg.calls.get(f, ())):
            if g == b:
                return d + 1
            if g not in seen:
                seen.add(g)
                q.append((g, d + 1))
    return INF


class Distances:
    """Instruction distances on the ICFG, memoised per target.

    A distance counts the statements executed after leaving the source up
    to and including the target. Gotos and writes to temporaries are free,
    so a compound assignment counts once. Stepping over a call costs the
    callee's shortest entry-to-return run plus the call and the return.
    """

    def __init__(self, icfg: ICFG):
        self.icfg = icfg
        self.prog = icfg.prog
        self._lock = threading.Lock()
        self._to: dict[Site, dict[Site, float]] = {}
        self._ret: dict[str, dict[Site, float]] = {}
        self.d2r = self._distance_to_return()

    def _step_weight(self, s: Site, d2r: dict[str, float]) -> float:
        ins = self.prog.instr(s)
        if ins.kind == ir.CALL:
            return d2r[ins.callee] + 2
        # gotos and temporaries are lowering artefacts, not statements
        if ins.kind == ir.GOTO or (ins.dst is not None and is_temp(ins.dst)):
            return 0
        return 1

    def _intra_to(self, sources: list[Site], d2r: dict[str, float], descend: bool) -> dict[Site, float]:
        """Reverse Dijkstra from ``sources``; with ``descend`` a call may also
        step into its callee."""
        dist: dict[Site, float] = {s: 0 for s in sources}
        heap = [(0, s) for s in sources]
        rev = self._reverse(descend)
        while heap:
            d, n = heapq.heappop(heap)
            if d > dist.get(n, INF):
                continue
            for p, kind in rev.get(n, ()):
                w = 1 if kind == "in" else self._step_weight(p, d2r)
                nd = d + w
                if nd < dist.get(p, INF):
                    dist[p] = nd
                    heapq.heappush(heap, (nd, p))
        return dist

    def _reverse(self, descend: bool):
        key = "_rev_d" if descend else "_rev"
        if not hasattr(self, key):
            rev = defaultdict(list)
            for s, outs in self.icfg.intra.items():
                ins = self.prog.instr(s)
                for t, _ in outs:
                    rev[t].append((s, "over" if ins.kind == ir.CALL else "seq"))
                if descend and ins.kind == ir.CALL:
                    rev[Site(ins.callee, 0)].append((s, "in"))
            setattr(self, key, rev)
        return getattr(self, key)

    def _distance_to_return(self) -> dict[str, float]:
        d2r = {f: INF for f in self.prog.functions}
        for _ in range(len(d2r) + 2):
            changed = False
            for f in self.prog.functions:
                dist = self._intra_to(self.icfg.returns_of(f), d2r, descend=False)
                v = dist.get(Site(f, 0), INF)
                if v < d2r[f]:
                    d2r[f] = v
                    changed = True
            if not changed:
                break
        return d2r

    def distance2return(self, func: str) -> float:
        return self.d2r[func]

    def to_return(self, s: Site) -> float:
        with self._lock:
            if s.func not in self._ret:
                self._ret[s.func] = self._intra_to(self.icfg.returns_of(s.func), self.d2r, descend=False)
            table = self._ret[s.func]
        return table.get(s, INF)

    def to_target(self, t: Site) -> dict[Site, float]:
        with self._lock:
            if t not in self._to:
                self._to[t] = self._intra_to([t], self.d2r, descend=True)
            return self._to[t]

    def instruction_distance(self, i: Site, k: Site) -> float:
        """Shortest distance between two sites of the same function."""
        if i.func != k.func:
            raise ValueError("instruction_distance needs sites of one function")
        with self._lock:
            key = ("intra", k)
            if key not in self._to:
                self._to[key] = self._intra_to([k], self.d2r, descend=False)
            table = self._to[key]
        return table.get(i, INF)

    def from_stack(self, stack: list[Site], t: Site) -> float:
        """Distance to ``t`` for an execution whose next instruction is
        ``stack[-1]`` and whose pending return sites are ``stack[:-1]``."""
        return self.stack_distance(self.to_target(t), stack)

    def to_any(self, targets) -> dict[Site, float]:
        """Distance table to the nearest of ``targets`` (not memoised)."""
        return self._intra_to(list(targets), self.d2r, descend=True)

    def stack_distance(self, table: dict[Site, float], stack: list[Site]) -> float:
        """Like ``from_stack`` but against a precomputed table."""
        best = INF
        acc = 0.0
        for pos in reversed(stack):
            best = min(best, acc + table.get(pos, INF))
            r = self.to_return(pos)
            if r == INF:
                break
            acc += r + 1
        return best
