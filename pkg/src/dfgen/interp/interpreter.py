"""Concrete interpreter producing def/use traces."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend import ir
from ..frontend.ir import IRProgram, Site, Var
from ..semantics import binop, unop

DEFAULT_FUEL = 1_000_000

Cell = tuple  # (frame id or None for globals, name)


@dataclass(frozen=True)
class Step:
    site: Site
    frame: int
    decision: bool | None = None
    uses: tuple = ()  # cells read directly
    defs: tuple = ()  # cells written, including through pointers
    ret: bool = False  # completion of a call: the call's result is written


@dataclass
class Trace:
    steps: list[Step] = field(default_factory=list)
    status: str = "return"  # return | abort | error | trap | fuel | stopped
    value: object = None
    message: str = ""

    def sites(self) -> list[Site]:
        return [s.site for s in self.steps if not s.ret]

    @property
    def reached_error(self) -> bool:
        return self.status == "error"


def default_value(typ: str):
    return None if typ == "int*" else (False if typ == "bool" else 0)


@dataclass
class _Frame:
    func: str
    fid: int
    args: tuple = ()
    call_site: Site | None = None


def normalise_inputs(prog: IRProgram, inputs: dict | None) -> dict:
    out = {}
    inputs = inputs or {}
    for name, typ in prog.inputs.items():
        v = inputs.get(name, default_value(typ))
        out[name] = bool(v) if typ == "bool" else int(v)
    return out


def run(prog: IRProgram, inputs: dict | None = None, fuel: int = DEFAULT_FUEL, until=None) -> Trace:
    """Execute ``prog`` on ``inputs`` (missing inputs default to zero/false).

    ``until(step)`` is called on each recorded step; returning True stops
    the run with status ``stopped``.
    """
    inputs = normalise_inputs(prog, inputs)
    mem: dict[Cell, object] = {(None, g): default_value(t) for g, t in prog.globals.items()}
    trace = Trace()
    next_fid = 1
    frames: list[_Frame] = []

    def push(func: str, args: tuple, call_site: Site | None) -> None:
        nonlocal next_fid
        f = _Frame(func, next_fid, args, call_site)
        next_fid += 1
        for name, typ in prog.functions[func].locals.items():
            mem[(f.fid, name)] = default_value(typ)
        frames.append(f)

    def cell(name: str) -> Cell:
        f = frames[-1]
        return (f.fid, name) if name in prog.functions[f.func].locals else (None, name)

    def val(o):
        return mem[cell(o.name)] if isinstance(o, Var) else o.value

    push(prog.entry, (), None)
    pc = Site(prog.entry, 0)
    steps = trace.steps
    fed = 0
    for _ in range(fuel):
        if until is not None:
            while fed < len(steps):
                if until(steps[fed]):
                    trace.status = "stopped"
                    return trace
                fed += 1
        fr = frames[-1]
        fn = prog.functions[pc.func]
        ins = fn.instrs[pc.index]
        k = ins.kind
        uses = tuple(cell(a.name) for a in ins.args if isinstance(a, Var)) if k not in (ir.ADDR, ir.PARAM) else ()
        nxt = Site(pc.func, pc.index + 1)
        decision = None
        defs: tuple = ()
        if k == ir.PARAM:
            idx = ins.args[0].value
            v = inputs[ins.dst] if fr.call_site is None else fr.args[idx]
            c = cell(ins.dst)
            mem[c] = v
            defs = (c,)
        elif k == ir.INPUT:
            c = cell(ins.dst)
            mem[c] = inputs[ins.dst]
            defs = (c,)
        elif k == ir.ASSIGN:
            if ins.op is None:
                v = val(ins.args[0])
            elif len(ins.args) == 1:
                v = unop(ins.op, val(ins.args[0]))
            else:
                a, b = val(ins.args[0]), val(ins.args[1])
                if ins.op in ("/", "%") and b == 0:
                    trace.status, trace.message = "trap", f"division by zero at {pc}"
                    return trace
                v = binop(ins.op, a, b)
            c = cell(ins.dst)
            mem[c] = v
            defs = (c,)
        elif k == ir.ADDR:
            c = cell(ins.dst)
            mem[c] = cell(ins.args[0].name)
            defs = (c,)
        elif k == ir.PCOPY:
            c = cell(ins.dst)
            mem[c] = val(ins.args[0])
            defs = (c,)
        elif k == ir.LOAD:
            p = val(ins.args[0])
            if p is None:
                trace.status, trace.message = "trap", f"null dereference at {pc}"
                return trace
            c = cell(ins.dst)
            mem[c] = mem[p]
            defs = (c,)
        elif k == ir.STORE:
            p = val(ins.args[0])
            if p is None:
                trace.status, trace.message = "trap", f"null dereference at {pc}"
                return trace
            mem[p] = val(ins.args[1])
            defs = (p,)
        elif k == ir.BRANCH:
            if ins.op is None:
                decision = bool(val(ins.args[0]))
            else:
                decision = bool(binop(ins.op, val(ins.args[0]), val(ins.args[1])))
            nxt = Site(pc.func, ins.targets[0 if decision else 1])
        elif k == ir.GOTO:
            nxt = Site(pc.func, ins.targets[0])
        elif k == ir.CALL:
            args = tuple(val(a) for a in ins.args)
            steps.append(Step(pc, fr.fid, None, uses, ()))
            push(ins.callee, args, pc)
            pc = Site(ins.callee, 0)
            continue
        elif k == ir.RETURN:
            v = val(ins.args[0]) if ins.args else None
            steps.append(Step(pc, fr.fid, None, uses, ()))
            frames.pop()
            if fr.call_site is None:
                trace.status, trace.value = "return", v
                return trace
            cs = fr.call_site
            caller = frames[-1]
            cins = prog.instr(cs)
            rdefs = ()
            if cins.dst is not None:
                c = cell(cins.dst)
                mem[c] = v
                rdefs = (c,)
            steps.append(Step(cs, caller.fid, None, (), rdefs, ret=True))
            pc = Site(cs.func, cs.index + 1)
            continue
        elif k == ir.ABORT:
            steps.append(Step(pc, fr.fid))
            trace.status = "abort"
            return trace
        elif k == ir.ERROR:
            steps.append(Step(pc, fr.fid))
            trace.status = "error"
            return trace
        steps.append(Step(pc, fr.fid, decision, uses, defs))
        pc = nxt
    trace.status, trace.message = "fuel", f"fuel of {fuel} steps exhausted"
    return trace
