"""Syntax tree for the .dfc language. Every node carries its source position."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Pos:
    file: str
    line: int
    col: int = 0


# expressions

@dataclass
class IntLit:
    value: int
    pos: Pos


@dataclass
class BoolLit:
    value: bool
    pos: Pos


@dataclass
class NullLit:
    pos: Pos


@dataclass
class Name:
    id: str
    pos: Pos


@dataclass
class Unary:
    op: str  # "neg", "!", "&", "*"
    operand: object
    pos: Pos


@dataclass
class Binary:
    op: str
    left: object
    right: object
    pos: Pos


@dataclass
class Call:
    name: str
    args: list
    pos: Pos


# statements

@dataclass
class VarDecl:
    type: str
    name: str
    init: object | None
    pos: Pos
    is_input: bool = False


@dataclass
class Assign:
    target: object  # Name or Unary("*")
    op: str | None  # compound operator, e.g. "*" for *=
    value: object
    pos: Pos


@dataclass
class ExprStmt:
    expr: object
    pos: Pos


@dataclass
class If:
    cond: object
    then: object
    orelse: object | None
    pos: Pos
    else_pos: Pos | None = None


@dataclass
class While:
    cond: object
    body: object
    pos: Pos
    end_pos: Pos | None = None


@dataclass
class Return:
    value: object | None
    pos: Pos


@dataclass
class Abort:
    pos: Pos


@dataclass
class ErrorStmt:
    """Reachability target emitted by the instrumenter (``__VERIFIER_error()``
    or ``assert(0)``)."""

    pos: Pos


@dataclass
class Goto:
    label: str
    pos: Pos


@dataclass
class Labeled:
    label: str
    stmt: object
    pos: Pos


@dataclass
class Block:
    stmts: list
    pos: Pos
    end_pos: Pos | None = None


@dataclass
class Param:
    type: str
    name: str
    pos: Pos


@dataclass
class FuncDef:
    ret_type: str
    name: str
    params: list[Param]
    body: Block
    pos: Pos


@dataclass
class Program:
    globals: list[VarDecl] = field(default_factory=list)
    functions: list[FuncDef] = field(default_factory=list)
    entry: str | None = None  # from "#pragma entry NAME"
