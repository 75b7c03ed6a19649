"""Concrete 32-bit two's-complement arithmetic shared by the interpreter and
the symbolic constant folder."""

from __future__ import annotations

INT_MIN = -(1 << 31)
INT_MAX = (1 << 31) - 1

ARITH = ("+", "-", "*", "/", "%")
COMPARE = ("==", "!=", "<", "<=", ">", ">=")


def wrap(v: int) -> int:
    v &= 0xFFFFFFFF
    return v - (1 << 32) if v & 0x80000000 else v


def c_div(a: int, b: int) -> int:
    # C truncates toward zero; caller guarantees b != 0
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap(q)


def c_mod(a: int, b: int) -> int:
    return wrap(a - b * c_div(a, b)) if not (a == INT_MIN and b == -1) else 0


def binop(op: str, a, b):
    """Evaluate a binary operator on concrete operands. Division by zero must
    be checked by the caller."""
    if op == "+":
        return wrap(a + b)
    if op == "-":
        return wrap(a - b)
    if op == "*":
        return wrap(a * b)
    if op == "/":
        return c_div(a, b)
    if op == "%":
        return c_mod(a, b)
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(op)


def unop(op: str, a):
    if op == "neg":
        return wrap(-a)
    if op == "!":
        return not a
    raise ValueError(op)
