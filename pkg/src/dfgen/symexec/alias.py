"""Alias set used to detect redefinitions of the tracked variable.

Entries are ``("var", cell)`` for the tracked variable itself and
``("deref", pointer_cell)`` for pointers known to point at it. Updates:

* ``p := q``   adds ``*p`` when ``*q`` is in the set, otherwise drops ``*p``
* ``p := &z``  adds ``*p`` when ``z`` is in the set, otherwise drops ``*p``
* ``*p := y``  redefines when ``*p`` is in the set
* ``v := y``   redefines when ``v`` is in the set
"""

from __future__ import annotations

from ..frontend import ir
from ..frontend.ir import Var


def seed(cell, mem: dict) -> frozenset:
    """Alias set right after the definition of ``cell``. Pointers already
    holding its address are included."""
    out = {("var", cell)}
    for c, v in mem.items():
        if v == cell and isinstance(v, tuple):
            out.add(("deref", c))
    return frozenset(out)


def update(alias: frozenset, ins: ir.Instr, step, cell_of, mem: dict) -> tuple[frozenset, bool]:
    """Apply one executed instruction. ``cell_of(name)`` resolves a variable in
    the frame the instruction ran in. Returns the new set and whether the
    tracked variable was redefined."""
    k = ins.kind
    if step.ret:
        # completion of a call writes the call's destination
        if step.defs and ("var", step.defs[0]) in alias:
            return alias, True
        return alias, False
    if k == ir.STORE:
        return alias, ("deref", cell_of(ins.args[0].name)) in alias
    if k == ir.ADDR:
        p = cell_of(ins.dst)
        target = cell_of(ins.args[0].name)
        redefined = ("var", p) in alias
        if ("var", target) in alias:
            return alias | {("deref", p)}, redefined
        return alias - {("deref", p)}, redefined
    if k == ir.PCOPY:
        p = cell_of(ins.dst)
        src = ins.args[0]
        if isinstance(src, Var) and ("deref", cell_of(src.name)) in alias:
            return alias | {("deref", p)}, False
        return alias - {("deref", p)}, False
    if k == ir.PARAM and step.defs:
        # binding a pointer argument across frames: decide by its value
        p = step.defs[0]
        v = mem.get(p)
        if isinstance(v, tuple):
            if ("var", v) in alias:
                return alias | {("deref", p)}, False
            return alias - {("deref", p)}, False
        return alias, ("var", p) in alias
    w = ins.writes()
    if w is not None and k != ir.CALL:
        return alias, ("var", cell_of(w)) in alias
    return alias, False
