"""Canonical text form of the IR.

The output is C99 with explicit gotos and is accepted by the .dfc parser, so
printing and re-lowering reproduces the same instruction sequence.
"""

from __future__ import annotations

from . import ir
from .ir import IRFunction, IRProgram

ERROR_STYLES = ("call", "label", "assert")


def _operand(o) -> str:
    if isinstance(o, ir.Const) and isinstance(o.value, int) and not isinstance(o.value, bool) and o.value < 0:
        return f"({o.value})"
    return str(o)


def _decl(typ: str, name: str) -> str:
    return f"int *{name}" if typ == "int*" else f"{typ} {name}"


def format_instr(ins: ir.Instr, labels: dict[int, str], error_style: str = "call") -> str:
    k = ins.kind
    a = [_operand(x) for x in ins.args]
    if k == ir.INPUT:
        return f"{ins.dst} = __VERIFIER_nondet_{'bool' if ins.op == 'bool' else 'int'}();"
    if k == ir.ASSIGN:
        if ins.op is None:
            return f"{ins.dst} = {a[0]};"
        if ins.op == "neg":
            return f"{ins.dst} = -{a[0]};"
        if ins.op == "!":
            return f"{ins.dst} = !{a[0]};"
        return f"{ins.dst} = {a[0]} {ins.op} {a[1]};"
    if k == ir.ADDR:
        return f"{ins.dst} = &{a[0]};"
    if k == ir.PCOPY:
        return f"{ins.dst} = {a[0]};"
    if k == ir.LOAD:
        return f"{ins.dst} = *{a[0]};"
    if k == ir.STORE:
        return f"*{a[0]} = {a[1]};"
    if k == ir.BRANCH:
        cond = a[0] if ins.op is None else f"{a[0]} {ins.op} {a[1]}"
        t, f = ins.targets
        return f"if ({cond}) goto {labels[t]}; else goto {labels[f]};"
    if k == ir.GOTO:
        return f"goto {labels[ins.targets[0]]};"
    if k == ir.CALL:
        call = f"{ins.callee}({', '.join(a)});"
        return f"{ins.dst} = {call}" if ins.dst else call
    if k == ir.RETURN:
        return f"return {a[0]};" if a else "return;"
    if k == ir.ABORT:
        return "abort();"
    if k == ir.ERROR:
        return "assert(0);" if error_style == "assert" else "__VERIFIER_error();"
    raise ValueError(k)


def print_function(prog: IRProgram, fn: IRFunction, error_style: str = "call") -> list[str]:
    targets = sorted({t for ins in fn.instrs for t in ins.targets})
    labels = {t: f"L{t}" for t in targets}
    params = ", ".join(_decl(t, n) for n, t in fn.params) or "void"
    out = [f"{_decl(fn.ret_type, fn.name)}({params})", "{"]
    pnames = {n for n, _ in fn.params}
    for name, typ in fn.locals.items():
        if name not in pnames:
            out.append(f"  {_decl(typ, name)};")
    error_labelled = False
    for i, ins in enumerate(fn.instrs):
        if ins.kind == ir.PARAM or ins.init:
            continue
        prefix = ""
        if i in labels:
            prefix += f"{labels[i]}: "
        if ins.kind == ir.ERROR and error_style == "label" and not error_labelled:
            prefix += "ERROR: "
            error_labelled = True
        text = format_instr(ins, labels, error_style)
        if ins.kind == ir.INPUT and prog.inputs.get(ins.dst) == "bool":
            text = f"{ins.dst} = __VERIFIER_nondet_bool();"
        out.append(f"  {prefix}{text}")
    out.append("}")
    return out


def print_program(prog: IRProgram, error_style: str = "call", pragma: bool = True) -> str:
    """Render ``prog`` as canonical source text."""
    if error_style not in ERROR_STYLES:
        raise ValueError(error_style)
    lines = []
    if pragma and prog.entry != "main":
        lines.append(f"#pragma entry {prog.entry}")
    inits = {}
    for ins in prog.functions[prog.entry].instrs:
        if ins.init:
            inits[ins.dst] = ins.args[0]
    for name, typ in prog.globals.items():
        if name in inits:
            lines.append(f"{_decl(typ, name)} = {_operand(inits[name])};")
        else:
            lines.append(f"{_decl(typ, name)};")
    for fn in prog.functions.values():
        if lines:
            lines.append("")
        lines.extend(print_function(prog, fn, error_style))
    return "\n".join(lines) + "\n"
