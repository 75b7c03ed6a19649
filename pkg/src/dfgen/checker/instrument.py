"""Reduce covering a def-use pair to reaching an error site.

A boolean ``cover_flag`` is false until the definition executes, set right
after it, cleared after every redefinition of the variable, and tested just
before the use. Reaching the ERROR instruction guarded by that test is then
equivalent to covering the pair.

Three shapes, depending on the variable:

* local whose address is never taken: the flag is a local of the same
  function, cleared on entry, so each activation tracks its own definition
* global whose address is never taken: a global flag
* address-taken variable: a global flag plus a global pointer ``cover_cell``
  remembering which cell was defined; direct writes and stores clear the
  flag only when they hit that cell, and the check compares it with ``&v``
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ..dataflow import DefUsePair
from ..frontend import ir
from ..frontend.ir import Const, Instr, IRFunction, IRProgram, Site, Var

FLAG = "cover_flag"
CELL = "cover_cell"


@dataclass(frozen=True)
class Patch:
    site: Site  # anchor in the base program
    action: str  # init | set-true-after-def | set-false-after-redef | assert-at-use


@dataclass
class InstrumentedProgram:
    base: IRProgram
    pair: DefUsePair
    prog: IRProgram
    flag: str
    cell: str | None
    shape: str  # local | global | address
    check_site: Site
    error_site: Site
    patches: list[Patch]
    site_map: dict[Site, Site]


def _fresh(prog: IRProgram, base: str) -> str:
    taken = set(prog.globals)
    for f in prog.functions.values():
        taken |= set(f.locals)
    taken |= set(prog.functions)
    name, n = base, 0
    while name in taken:
        n += 1
        name = f"{base}_{n}"
    return name


class _Builder:
    """Collects insertions for one function and lays it out again."""

    def __init__(self, f: IRFunction):
        self.f = f
        self.head: list = []  # runs once after the prologue, never a jump target
        self.head_at = f.prologue_len
        self.before: dict[int, list] = {}
        self.after: dict[int, list] = {}
        self.tail: list = []
        self.redirect: dict[tuple[int, int], object] = {}  # (branch idx, target slot) -> label
        self.locals = dict(f.locals)
        self.ntemp = 0

    def temp(self, typ: str) -> str:
        while True:
            self.ntemp += 1
            name = f"{ir.TEMP_PREFIX}cov{self.ntemp}"
            if name not in self.locals:
                self.locals[name] = typ
                return name

    def build(self) -> tuple[IRFunction, dict[int, int], dict]:
        out: list[Instr] = []
        pos: dict = {}

        def put(items):
            for label, ins in items:
                if label is not None:
                    pos[label] = len(out)
                out.append(ins)

        for i, ins in enumerate(self.f.instrs):
            if i == self.head_at:
                put(self.head)
            pos[("old", i)] = len(out)
            put(self.before.get(i, ()))
            pos[("at", i)] = len(out)
            if ins.targets:
                tg = tuple(self.redirect.get((i, k), ("old", t)) for k, t in enumerate(ins.targets))
                ins = dataclasses.replace(ins, targets=tg)
            out.append(ins)
            put(self.after.get(i, ()))
        put(self.tail)
        final = []
        for ins in out:
            if ins.targets:
                ins = dataclasses.replace(ins, targets=tuple(pos[t] if isinstance(t, tuple) else t
                                                              for t in ins.targets))
            final.append(ins)
        f = dataclasses.replace(self.f, instrs=tuple(final), locals=self.locals)
        index = {i: pos[("at", i)] for i in range(len(self.f.instrs))}
        return f, index, pos


def instrument(prog: IRProgram, pair: DefUsePair) -> InstrumentedProgram:
    """Build the instrumented program for ``pair``."""
    v = pair.var
    address = (pair.scope, v) in prog.address_taken()
    shape = "address" if address else ("local" if pair.scope is not None else "global")
    flag = _fresh(prog, FLAG)
    cell = _fresh(prog, CELL) if address else None
    builders = {name: _Builder(f) for name, f in prog.functions.items()}
    patches: list[Patch] = []
    labels = iter(range(1, 1 << 30))

    def new_label(tag: str):
        return ("new", tag, next(labels))

    def mk(kind: str, anchor: Instr, **kw) -> Instr:
        return Instr(kind, anchor.line, file=anchor.file, **kw)

    def set_flag(anchor: Instr, value: bool, label=None):
        return (label, mk(ir.ASSIGN, anchor, dst=flag, args=(Const(value),)))

    def hits_cell(anchor: Instr, ptr: Var, cont, then_items: list) -> list:
        """``if (ptr == cover_cell) { then_items }`` falling through to ``cont``."""
        body = new_label("hit")
        items = [(None, mk(ir.BRANCH, anchor, op="==", args=(ptr, Var(cell)), targets=(body, cont)))]
        items.append((body, then_items[0][1]))
        items.extend(then_items[1:])
        return items

    def addr_of_v(b: _Builder, anchor: Instr) -> tuple[list, Var]:
        t = b.temp("int*")
        return [(None, mk(ir.ADDR, anchor, dst=t, args=(Var(v),)))], Var(t)

    def in_scope(func: str) -> bool:
        try:
            return prog.scope(func, v) == pair.scope
        except KeyError:
            return False

    # (1) clear the flag where tracking starts
    if shape == "local":
        f = prog.functions[pair.scope]
        b = builders[pair.scope]
        b.locals[flag] = "bool"
        b.head.append(set_flag(f.instrs[0], False))
        patches.append(Patch(Site(f.name, b.head_at), "init"))
    else:
        patches.append(Patch(prog.entry_site(), "init"))

    # (2) set after the definition
    d_ins = prog.instr(pair.def_site)
    b = builders[pair.def_site.func]
    items = []
    if address:
        items.append((None, mk(ir.ADDR, d_ins, dst=cell, args=(Var(v),))))
    items.append(set_flag(d_ins, True))
    if shape == "local" and pair.def_site.index < b.head_at:
        b.head.extend(items)  # parameter definitions: after the flag is cleared
    else:
        b.after.setdefault(pair.def_site.index, []).extend(items)
    patches.append(Patch(pair.def_site, "set-true-after-def"))

    # (3) clear after every redefinition
    for fname, f in prog.functions.items():
        b = builders[fname]
        for i, ins in enumerate(f.instrs):
            site = Site(fname, i)
            if site == pair.def_site:
                continue
            direct = ins.writes() == v and in_scope(fname)
            store = address and ins.kind == ir.STORE
            if not (direct or store):
                continue
            if shape != "address":
                b.after.setdefault(i, []).append(set_flag(ins, False))
            elif direct:
                pre, t = addr_of_v(b, ins)
                b.after.setdefault(i, []).extend(pre + hits_cell(ins, t, ("old", i + 1), [set_flag(ins, False)]))
            else:
                b.after.setdefault(i, []).extend(hits_cell(ins, ins.args[0], ("old", i + 1),
                                                           [set_flag(ins, False)]))
            patches.append(Patch(site, "set-false-after-redef"))

    # (4) check at the use
    u = pair.use_site
    u_ins = prog.instr(u)
    b = builders[u.func]
    err = new_label("error")
    start = new_label("check")
    if pair.edge is None:
        cont = ("at", u.index)
        target_items = b.before.setdefault(u.index, [])
    else:
        # p-use: the check sits on the chosen branch edge
        slot = 0 if pair.edge == "T" else 1
        cont = ("old", u_ins.targets[slot])
        b.redirect[(u.index, slot)] = start
        target_items = b.tail
    check = []
    if address:
        pre, t = addr_of_v(b, u_ins)
        test = new_label("test")
        check += pre
        check.append((None, mk(ir.BRANCH, u_ins, op="==", args=(Var(cell), t), targets=(test, cont))))
        check.append((test, mk(ir.BRANCH, u_ins, args=(Var(flag),), targets=(err, cont))))
    else:
        check.append((None, mk(ir.BRANCH, u_ins, args=(Var(flag),), targets=(err, cont))))
    check[0] = (start, check[0][1])
    target_items.extend(check)
    b.tail.append((err, mk(ir.ERROR, u_ins)))
    patches.append(Patch(u, "assert-at-use"))

    functions = {}
    site_map: dict[Site, Site] = {}
    positions = {}
    for fname, bld in builders.items():
        nf, index, pos = bld.build()
        functions[fname] = nf
        positions[fname] = pos
        for i, j in index.items():
            site_map[Site(fname, i)] = Site(fname, j)
    globals_ = dict(prog.globals)
    if shape != "local":
        globals_[flag] = "bool"
    if address:
        globals_[cell] = "int*"
    new = IRProgram(functions, globals_, prog.entry, dict(prog.inputs), dict(prog.sources))
    pos = positions[u.func]
    return InstrumentedProgram(prog, pair, new, flag, cell, shape, Site(u.func, pos[start]),
                               Site(u.func, pos[err]), patches, site_map)
