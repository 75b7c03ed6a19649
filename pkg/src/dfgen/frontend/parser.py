"""Recursive-descent parser for .dfc sources."""

from __future__ import annotations

import re

from ..errors import DfcSyntaxError, UnsupportedConstruct
from . import ast as A

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<int>0[xX][0-9a-fA-F]+|\d+)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|\+=|-=|\*=|/=|%=|\+\+|--|->|[-+*/%<>=!&(){},;:\[\].?|^~])
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {
    "int", "bool", "_Bool", "void", "if", "else", "while", "return", "abort",
    "input", "goto", "true", "false", "null", "NULL", "extern",
}
UNSUPPORTED_KEYWORDS = {
    "for", "do", "switch", "case", "default", "break", "continue", "struct",
    "union", "enum", "typedef", "double", "float", "char", "long", "short",
    "unsigned", "signed", "sizeof",
}
TYPE_WORDS = {"int", "bool", "_Bool", "void"}
UNSUPPORTED_OPS = {"[", "]", "->", ".", "?", "|", "^", "~"}
COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}
BINARY_PREC = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: A.Pos):
        self.kind, self.text, self.pos = kind, text, pos

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.pos.line})"


def tokenize(text: str, file: str = "<input>") -> tuple[list[Token], str | None]:
    """Split ``text`` into tokens. Lines whose first non-blank character is
    ``#`` are skipped, except ``#pragma entry NAME`` which names the entry
    function."""
    entry = None
    lines = text.split("\n")
    for i, raw in enumerate(lines):
        stripped = raw.strip()
        if stripped.startswith("#"):
            m = re.match(r"#\s*pragma\s+entry\s+([A-Za-z_]\w*)\s*$", stripped)
            if m:
                entry = m.group(1)
            lines[i] = ""
    text = "\n".join(lines)
    toks: list[Token] = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise DfcSyntaxError(f"unexpected character {text[i]!r}", file, line, i - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind in ("int", "id", "op"):
            if kind == "id" and tok in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, tok, A.Pos(file, line, i - line_start + 1)))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = i + tok.rfind("\n") + 1
        i = m.end()
    toks.append(Token("eof", "", A.Pos(file, line, i - line_start + 1)))
    return toks, entry


class Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.file = file
        self.toks, self.entry = tokenize(text, file)
        self.i = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, expected: str) -> DfcSyntaxError:
        t = self.tok
        got = "end of file" if t.kind == "eof" else repr(t.text)
        return DfcSyntaxError(f"expected {expected}, got {got}", t.pos.file, t.pos.line, t.pos.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(repr(text))
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "id":
            self.check_unsupported()
            raise self.error("identifier")
        return self.advance()

    def check_unsupported(self) -> None:
        t = self.tok
        if (t.kind == "id" and t.text in UNSUPPORTED_KEYWORDS) or (t.kind == "op" and t.text in UNSUPPORTED_OPS):
            raise UnsupportedConstruct(f"{t.pos.file}:{t.pos.line}:{t.pos.col}: '{t.text}' is not supported")

    # types

    def at_type(self) -> bool:
        if self.tok.kind == "id" and self.tok.text in UNSUPPORTED_KEYWORDS - {"for", "do", "switch", "case", "default", "break", "continue", "sizeof"}:
            self.check_unsupported()
        return self.tok.kind == "kw" and self.tok.text in TYPE_WORDS

    def base_type(self) -> str:
        t = self.advance()
        return "bool" if t.text == "_Bool" else t.text

    def declarator_type(self, base: str) -> str:
        if self.at("*"):
            self.advance()
            if base != "int":
                raise UnsupportedConstruct(f"{self.file}:{self.tok.pos.line}: only pointers to int are supported")
            if self.at("*"):
                raise UnsupportedConstruct(f"{self.file}:{self.tok.pos.line}: pointers to pointers are not supported")
            return "int*"
        return base

    # top level

    def parse_program(self) -> A.Program:
        prog = A.Program(entry=self.entry)
        while self.tok.kind != "eof":
            is_input = False
            if self.at("extern"):
                self.advance()
            if self.at("input"):
                self.advance()
                is_input = True
            if not self.at_type():
                self.check_unsupported()
                raise self.error("declaration")
            start = self.tok.pos
            base = self.base_type()
            typ = self.declarator_type(base)
            name = self.ident()
            if self.at("("):
                if is_input:
                    raise self.error("';' after input declaration")
                fn = self.function_rest(typ, name, start)
                if fn is not None:
                    prog.functions.append(fn)
                continue
            prog.globals.extend(self.decl_rest(base, typ, name, is_input))
        return prog

    def function_rest(self, typ: str, name: Token, start: A.Pos) -> A.FuncDef | None:
        self.expect("(")
        params: list[A.Param] = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        elif not self.at(")"):
            while True:
                if not self.at_type():
                    raise self.error("parameter type")
                ppos = self.tok.pos
                ptype = self.declarator_type(self.base_type())
                pname = self.ident().text if self.tok.kind == "id" else None
                params.append(A.Param(ptype, pname, ppos))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        if self.at(";"):  # prototype
            self.advance()
            return None
        for p in params:
            if p.name is None:
                raise DfcSyntaxError("parameter name missing", p.pos.file, p.pos.line, p.pos.col)
        body = self.block()
        return A.FuncDef(typ, name.text, params, body, start)

    def decl_rest(self, base: str, typ: str, name: Token, is_input: bool) -> list[A.VarDecl]:
        out = []
        while True:
            init = None
            if self.at("["):
                raise UnsupportedConstruct(f"{name.pos.file}:{name.pos.line}: arrays are not supported")
            if self.at("="):
                if is_input:
                    raise self.error("';' after input declaration")
                self.advance()
                init = self.expr()
            out.append(A.VarDecl(typ, name.text, init, name.pos, is_input))
            if not self.at(","):
                break
            self.advance()
            typ = self.declarator_type(base)
            name = self.ident()
        self.expect(";")
        if typ == "void" or any(d.type == "void" for d in out):
            raise DfcSyntaxError("variables cannot have type void", name.pos.file, name.pos.line, name.pos.col)
        return out

    # statements

    def block(self) -> A.Block:
        start = self.expect("{").pos
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("'}'")
            stmts.extend(self.statement())
        end = self.advance().pos
        return A.Block(stmts, start, end)

    def statement(self) -> list:
        """Parse one statement; declarations with several declarators expand
        to several nodes, hence the list."""
        t = self.tok
        self.check_unsupported()
        if self.at("{"):
            return [self.block()]
        if self.at(";"):
            self.advance()
            return []
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.single_statement()
            orelse, else_pos = None, None
            if self.at("else"):
                else_pos = self.advance().pos
                orelse = self.single_statement()
            return [A.If(cond, then, orelse, t.pos, else_pos)]
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            body = self.single_statement()
            end = body.end_pos if isinstance(body, A.Block) else None
            return [A.While(cond, body, t.pos, end)]
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return [A.Return(value, t.pos)]
        if self.at("abort"):
            self.advance()
            if self.at("("):
                self.advance()
                self.expect(")")
            self.expect(";")
            return [A.Abort(t.pos)]
        if self.at("goto"):
            self.advance()
            label = self.ident().text
            self.expect(";")
            return [A.Goto(label, t.pos)]
        if self.at("input"):
            self.advance()
            if not self.at_type():
                raise self.error("type")
            base = self.base_type()
            typ = self.declarator_type(base)
            name = self.ident()
            return self.decl_rest(base, typ, name, True)
        if self.at_type():
            base = self.base_type()
            typ = self.declarator_type(base)
            name = self.ident()
            return self.decl_rest(base, typ, name, False)
        if t.kind == "id" and self.peek().text == ":" and self.peek().kind == "op":
            self.advance()
            self.advance()
            if self.at("}"):
                return [A.Labeled(t.text, A.Block([], t.pos), t.pos)]
            inner = self.statement()
            if not inner:
                return [A.Labeled(t.text, A.Block([], t.pos), t.pos)]
            return [A.Labeled(t.text, inner[0], t.pos)] + inner[1:]
        return [self.simple_statement()]

    def single_statement(self):
        stmts = self.statement()
        if len(stmts) == 1:
            return stmts[0]
        pos = stmts[0].pos if stmts else self.tok.pos
        return A.Block(stmts, pos)

    def simple_statement(self):
        t = self.tok
        if self.at("++", "--"):
            op = "+" if self.advance().text == "++" else "-"
            target = self.unary()
            self.expect(";")
            return A.Assign(self.lvalue(target), op, A.IntLit(1, t.pos), t.pos)
        e = self.expr()
        if self.at("="):
            self.advance()
            value = self.expr()
            self.expect(";")
            return A.Assign(self.lvalue(e), None, value, t.pos)
        if self.tok.kind == "op" and self.tok.text in COMPOUND:
            op = COMPOUND[self.advance().text]
            value = self.expr()
            self.expect(";")
            return A.Assign(self.lvalue(e), op, value, t.pos)
        if self.at("++", "--"):
            op = "+" if self.advance().text == "++" else "-"
            self.expect(";")
            return A.Assign(self.lvalue(e), op, A.IntLit(1, t.pos), t.pos)
        self.expect(";")
        if isinstance(e, A.Call):
            if e.name == "__VERIFIER_error" and not e.args:
                return A.ErrorStmt(t.pos)
            if e.name == "assert":
                if len(e.args) == 1 and isinstance(e.args[0], (A.IntLit, A.BoolLit)) and not e.args[0].value:
                    return A.ErrorStmt(t.pos)
                raise UnsupportedConstruct(f"{t.pos.file}:{t.pos.line}: only assert(0) is supported")
            if e.name == "abort" and not e.args:
                return A.Abort(t.pos)
            return A.ExprStmt(e, t.pos)
        raise DfcSyntaxError("expression statement must be a call", t.pos.file, t.pos.line, t.pos.col)

    def lvalue(self, e):
        if isinstance(e, A.Name):
            return e
        if isinstance(e, A.Unary) and e.op == "*":
            if isinstance(e.operand, A.Name):
                return e
            raise UnsupportedConstruct(f"{e.pos.file}:{e.pos.line}: pointer arithmetic is not supported")
        raise DfcSyntaxError("invalid assignment target", e.pos.file, e.pos.line, e.pos.col)

    # expressions

    def expr(self, level: int = 0):
        if level == len(BINARY_PREC):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in BINARY_PREC[level]:
            t = self.advance()
            right = self.expr(level + 1)
            left = A.Binary(t.text, left, right, t.pos)
        return left

    def unary(self):
        t = self.tok
        self.check_unsupported()
        if self.at("-"):
            self.advance()
            operand = self.unary()
            if isinstance(operand, A.IntLit):
                from ..semantics import wrap
                return A.IntLit(wrap(-operand.value), t.pos)
            return A.Unary("neg", operand, t.pos)
        if self.at("+"):
            self.advance()
            return self.unary()
        if self.at("!"):
            self.advance()
            return A.Unary("!", self.unary(), t.pos)
        if self.at("&"):
            self.advance()
            operand = self.unary()
            if not isinstance(operand, A.Name):
                raise UnsupportedConstruct(f"{t.pos.file}:{t.pos.line}: '&' applies only to variables")
            return A.Unary("&", operand, t.pos)
        if self.at("*"):
            self.advance()
            operand = self.unary()
            if not isinstance(operand, A.Name):
                raise UnsupportedConstruct(f"{t.pos.file}:{t.pos.line}: pointer arithmetic is not supported")
            return A.Unary("*", operand, t.pos)
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            v = int(t.text, 0)
            if v > 2**31:
                raise DfcSyntaxError("integer literal out of range", t.pos.file, t.pos.line, t.pos.col)
            return A.IntLit(v, t.pos)
        if self.at("true", "false"):
            self.advance()
            return A.BoolLit(t.text == "true", t.pos)
        if self.at("null", "NULL"):
            self.advance()
            return A.NullLit(t.pos)
        if t.kind == "id":
            self.advance()
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.advance()
                        args.append(self.expr())
                self.expect(")")
                return A.Call(t.text, args, t.pos)
            return A.Name(t.text, t.pos)
        if self.at("("):
            self.advance()
            if self.at_type():
                raise UnsupportedConstruct(f"{t.pos.file}:{t.pos.line}: casts are not supported")
            e = self.expr()
            self.expect(")")
            return e
        self.check_unsupported()
        raise self.error("expression")


def parse(text: str, file: str = "<input>") -> A.Program:
    prog = Parser(text, file).parse_program()
    if not prog.functions:
        raise DfcSyntaxError("no entry function", file, 1, 1)
    return prog
