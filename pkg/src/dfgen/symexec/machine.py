"""Symbolic execution of single IR instructions.

States carry a concrete call stack and memory whose values are either
concrete (ints, bools, pointer cells) or symbolic expressions. Pointers are
always concrete because they can only originate from ``&x``.
"""

from __future__ import annotations

import itertools

from ..frontend import ir
from ..frontend.ir import IRProgram, Site, Var
from ..graphs import ICFG
from ..interp.interpreter import Step, default_value
from .expr import Expr, mk_bin, mk_un, negate, sym

CONT, FORK, GUARD, EXIT, TRUNCATED = "cont", "fork", "guard", "exit", "truncated"


class SFrame:
    __slots__ = ("func", "fid", "call_site", "args", "loops")

    def __init__(self, func: str, fid: int, call_site: Site | None, args: tuple, loops: dict | None = None):
        self.func = func
        self.fid = fid
        self.call_site = call_site
        self.args = args
        self.loops = loops or {}

    def copy(self) -> "SFrame":
        return SFrame(self.func, self.fid, self.call_site, self.args, dict(self.loops))


class SymState:
    """An execution state. Search metadata lives in the trailing slots."""

    __slots__ = (
        "sid", "parent", "frames", "mem", "pc", "next", "decisions", "trace", "next_fid", "instrs",
        "status", "truncated",
        # pair tracking and search metadata
        "cut_idx", "def_live", "tracked", "alias", "doomed", "since_new", "parked", "dist", "created",
        "covered", "checked", "key",
    )

    def __init__(self):
        self.sid = 0
        self.parent = None
        self.frames: list[SFrame] = []
        self.mem: dict = {}
        self.pc: tuple = ()
        self.next: Site | None = None
        self.decisions = None  # cons list ((site, bool), prev)
        self.trace = None  # cons list (Step, prev) when recording
        self.next_fid = 1
        self.instrs = 0
        self.status = None
        self.truncated = False
        self.cut_idx = 0
        self.def_live = False
        self.tracked = None
        self.alias = frozenset()
        self.doomed = False
        self.since_new = 0
        self.parked = False
        self.dist = None
        self.created = 0
        self.covered = False
        self.checked = True
        self.key = None

    def copy(self) -> "SymState":
        s = SymState.__new__(SymState)
        for name in SymState.__slots__:
            setattr(s, name, getattr(self, name))
        s.frames = [f.copy() for f in self.frames]
        s.mem = dict(self.mem)
        return s

    @property
    def frame(self) -> SFrame:
        return self.frames[-1]

    def stack(self) -> list[Site]:
        """Return sites of callers (outermost first) followed by the next site."""
        out = [Site(f.call_site.func, f.call_site.index + 1) for f in self.frames[1:]]
        out.append(self.next)
        return out

    def decision_list(self) -> list[tuple[Site, bool]]:
        out = []
        d = self.decisions
        while d is not None:
            out.append(d[0])
            d = d[1]
        return out[::-1]

    def steps(self) -> list[Step]:
        out = []
        t = self.trace
        while t is not None:
            out.append(t[0])
            t = t[1]
        return out[::-1]


class Machine:
    """Executes one instruction at a time.

    ``bounds`` = (unwind, depth) enables loop and call-depth accounting: a
    transition that would exceed them yields ``TRUNCATED``.
    """

    def __init__(self, prog: IRProgram, icfg: ICFG | None = None, bounds: tuple[int, int] | None = None,
                 record: bool = False):
        self.prog = prog
        self.icfg = icfg or ICFG(prog)
        self.bounds = bounds
        self.record = record
        self.syms = {name: sym(name, typ) for name, typ in prog.inputs.items()}
        self._ids = itertools.count(1)

    def new_id(self) -> int:
        return next(self._ids)

    def initial_state(self) -> SymState:
        st = SymState()
        for g, t in self.prog.globals.items():
            st.mem[(None, g)] = default_value(t)
        self._push(st, self.prog.entry, (), None)
        st.next = Site(self.prog.entry, 0)
        return st

    def _push(self, st: SymState, func: str, args: tuple, call_site: Site | None) -> None:
        f = SFrame(func, st.next_fid, call_site, args)
        st.next_fid += 1
        for name, typ in self.prog.functions[func].locals.items():
            st.mem[(f.fid, name)] = default_value(typ)
        st.frames.append(f)

    def cell(self, st: SymState, name: str):
        f = st.frames[-1]
        return (f.fid, name) if name in self.prog.functions[f.func].locals else (None, name)

    def _val(self, st: SymState, o):
        return st.mem[self.cell(st, o.name)] if isinstance(o, Var) else o.value

    def _edge(self, st: SymState, u: int, v: int) -> bool:
        """Follow an intra-procedural edge; False if the unwind bound is exceeded."""
        if self.bounds is None:
            return True
        fr = st.frames[-1]
        info = self.icfg.loops(fr.func)
        for h in info.exits(u, v):
            fr.loops.pop(h, None)
        if (u, v) in info.back_edges:
            n = fr.loops.get(v, 0) + 1
            if n > self.bounds[0]:
                return False
            fr.loops[v] = n
        return True

    def _record(self, st: SymState, step: Step) -> None:
        st.instrs += 1
        if self.record:
            st.trace = (step, st.trace)

    def step(self, st: SymState):
        """Execute ``st.next``. Returns ``(kind, payload)``:

        * ``(CONT, steps)``: ``st`` advanced in place. A return yields two
          steps, the return itself and the completion of the call.
        * ``(GUARD, steps)``: advanced, with a new constraint appended to ``st.pc``
          that still has to be checked.
        * ``(FORK, [(child, step), (child, step)])``: true side first; each child
          has its branch constraint appended to ``pc``. ``st`` is consumed.
        * ``(EXIT, steps)``: ``st.status`` is return/abort/error/trap; a
          trapping instruction does not complete and yields no step.
        * ``(TRUNCATED, steps)``: a bound was hit.
        """
        pc = st.next
        fn = self.prog.functions[pc.func]
        ins = fn.instrs[pc.index]
        k = ins.kind
        fr = st.frames[-1]
        mem = st.mem
        uses = tuple(self.cell(st, a.name) for a in ins.args if isinstance(a, Var)) if k not in (ir.ADDR, ir.PARAM) else ()
        defs: tuple = ()
        kind = CONT
        nxt = pc.index + 1
        if k == ir.PARAM:
            if fr.call_site is None:
                v = self.syms[ins.dst]
            else:
                v = fr.args[ins.args[0].value]
            c = self.cell(st, ins.dst)
            mem[c] = v
            defs = (c,)
        elif k == ir.INPUT:
            c = self.cell(st, ins.dst)
            mem[c] = self.syms[ins.dst]
            defs = (c,)
        elif k == ir.ASSIGN:
            if ins.op is None:
                v = self._val(st, ins.args[0])
            elif len(ins.args) == 1:
                v = mk_un(ins.op, self._val(st, ins.args[0]))
            else:
                a, b = self._val(st, ins.args[0]), self._val(st, ins.args[1])
                if ins.op in ("/", "%"):
                    g = mk_bin("!=", b, 0)
                    if g is False:
                        st.status = "trap"
                        return EXIT, []
                    if isinstance(g, Expr):
                        st.pc = st.pc + (g,)
                        kind = GUARD
                v = mk_bin(ins.op, a, b)
            c = self.cell(st, ins.dst)
            mem[c] = v
            defs = (c,)
        elif k == ir.ADDR:
            c = self.cell(st, ins.dst)
            mem[c] = self.cell(st, ins.args[0].name)
            defs = (c,)
        elif k == ir.PCOPY:
            c = self.cell(st, ins.dst)
            mem[c] = self._val(st, ins.args[0])
            defs = (c,)
        elif k == ir.LOAD:
            p = self._val(st, ins.args[0])
            if p is None:
                st.status = "trap"
                return EXIT, []
            c = self.cell(st, ins.dst)
            mem[c] = mem[p]
            defs = (c,)
        elif k == ir.STORE:
            p = self._val(st, ins.args[0])
            if p is None:
                st.status = "trap"
                return EXIT, []
            mem[p] = self._val(st, ins.args[1])
            defs = (p,)
        elif k == ir.BRANCH:
            if ins.op is None:
                cond = self._val(st, ins.args[0])
            else:
                cond = mk_bin(ins.op, self._val(st, ins.args[0]), self._val(st, ins.args[1]))
            t, f = ins.targets
            if not isinstance(cond, Expr):
                dec = bool(cond)
                step = Step(pc, fr.fid, dec, uses, ())
                self._record(st, step)
                st.decisions = ((pc, dec), st.decisions)
                tgt = t if dec else f
                if not self._edge(st, pc.index, tgt):
                    st.truncated = True
                    return TRUNCATED, [step]
                st.next = Site(pc.func, tgt)
                return CONT, [step]
            out = []
            for dec, tgt, c in ((True, t, cond), (False, f, negate(cond))):
                child = st.copy() if dec else st
                step = Step(pc, fr.fid, dec, uses, ())
                self._record(child, step)
                child.decisions = ((pc, dec), child.decisions)
                child.pc = child.pc + (c,)
                if not self._edge(child, pc.index, tgt):
                    child.truncated = True
                    child.status = "truncated"
                child.next = Site(pc.func, tgt)
                out.append((child, step))
            return FORK, out
        elif k == ir.GOTO:
            nxt = ins.targets[0]
        elif k == ir.CALL:
            step = Step(pc, fr.fid, None, uses, ())
            self._record(st, step)
            if self.bounds is not None and len(st.frames) > self.bounds[1]:
                st.truncated = True
                return TRUNCATED, [step]
            args = tuple(self._val(st, a) for a in ins.args)
            self._push(st, ins.callee, args, pc)
            st.next = Site(ins.callee, 0)
            return CONT, [step]
        elif k == ir.RETURN:
            v = self._val(st, ins.args[0]) if ins.args else None
            step = Step(pc, fr.fid, None, uses, ())
            self._record(st, step)
            st.frames.pop()
            if fr.call_site is None:
                st.status = "return"
                return EXIT, [step]
            cs = fr.call_site
            cins = self.prog.instr(cs)
            rdefs = ()
            if cins.dst is not None:
                c = self.cell(st, cins.dst)
                mem[c] = v
                rdefs = (c,)
            rstep = Step(cs, st.frames[-1].fid, None, (), rdefs, ret=True)
            self._record(st, rstep)
            if not self._edge(st, cs.index, cs.index + 1):
                st.truncated = True
                return TRUNCATED, [step, rstep]
            st.next = Site(cs.func, cs.index + 1)
            return CONT, [step, rstep]
        elif k in (ir.ABORT, ir.ERROR):
            step = Step(pc, fr.fid)
            self._record(st, step)
            st.status = "abort" if k == ir.ABORT else "error"
            return EXIT, [step]
        step = Step(pc, fr.fid, None, uses, defs)
        self._record(st, step)
        if not self._edge(st, pc.index, nxt):
            st.truncated = True
            return TRUNCATED, [step]
        st.next = Site(pc.func, nxt)
        return kind, [step]
