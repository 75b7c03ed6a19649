"""Symbolic expressions over 32-bit ints and bools.

Concrete values stay plain Python ints/bools; operations on them fold
eagerly with the interpreter's semantics, so symbolic terms only appear when
an input is involved.
"""

from __future__ import annotations

from ..semantics import binop, unop

NEGATE = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}
BOOL_OPS = {"==", "!=", "<", "<=", ">", ">=", "!", "and", "or"}


class Expr:
    __slots__ = ("op", "args", "type", "z3", "__weakref__")

    def __init__(self, op: str, args: tuple, typ: str):
        self.op = op
        self.args = args
        self.type = typ
        self.z3 = None

    def __repr__(self) -> str:
        return to_str(self)


def sym(name: str, typ: str = "int") -> Expr:
    return Expr("sym", (name,), typ)


def is_sym(v) -> bool:
    return isinstance(v, Expr)


def mk_bin(op: str, a, b):
    if not isinstance(a, Expr) and not isinstance(b, Expr):
        return binop(op, a, b)
    if op in ("==", "!=") and a is b:
        return op == "=="
    return Expr(op, (a, b), "bool" if op in BOOL_OPS else "int")


def mk_un(op: str, a):
    if not isinstance(a, Expr):
        return unop(op, a)
    if op == "!":
        if a.op == "!":
            return a.args[0]
        if a.op in NEGATE:
            return Expr(NEGATE[a.op], a.args, "bool")
        return Expr("!", (a,), "bool")
    if op == "neg" and a.op == "neg":
        return a.args[0]
    return Expr(op, (a,), "int")


def negate(c):
    return mk_un("!", c)


def evaluate(e, env: dict, memo: dict | None = None):
    """Evaluate under the concrete semantics; ``env`` maps symbol names to values."""
    if not isinstance(e, Expr):
        return e
    if memo is None:
        memo = {}
    key = id(e)
    if key in memo:
        return memo[key]
    if e.op == "sym":
        v = env[e.args[0]]
    elif e.op == "and":
        v = all(evaluate(a, env, memo) for a in e.args)
    elif e.op == "or":
        v = any(evaluate(a, env, memo) for a in e.args)
    elif len(e.args) == 1:
        v = unop(e.op, evaluate(e.args[0], env, memo))
    else:
        a, b = evaluate(e.args[0], env, memo), evaluate(e.args[1], env, memo)
        if e.op in ("/", "%") and b == 0:
            raise ZeroDivisionError("division by zero in symbolic term")
        v = binop(e.op, a, b)
    memo[key] = v
    return v


def symbols(e, out: set | None = None) -> set:
    out = set() if out is None else out
    stack = [e]
    seen = set()
    while stack:
        x = stack.pop()
        if not isinstance(x, Expr) or id(x) in seen:
            continue
        seen.add(id(x))
        if x.op == "sym":
            out.add((x.args[0], x.type))
        else:
            stack.extend(x.args)
    return out


def to_str(e) -> str:
    if not isinstance(e, Expr):
        if isinstance(e, bool):
            return "true" if e else "false"
        return str(e)
    if e.op == "sym":
        return e.args[0]
    if e.op == "neg":
        return f"-{to_str(e.args[0])}"
    if e.op == "!":
        return f"!({to_str(e.args[0])})"
    if e.op in ("and", "or"):
        j = " && " if e.op == "and" else " || "
        return "(" + j.join(to_str(a) for a in e.args) + ")"
    return f"({to_str(e.args[0])} {e.op} {to_str(e.args[1])})"
