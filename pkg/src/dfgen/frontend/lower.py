"""Type checking and lowering from the syntax tree to three-address IR."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DfcSyntaxError, DfcTypeError, UnresolvedName, UnsupportedConstruct
from ..semantics import ARITH, COMPARE, INT_MAX, INT_MIN
from . import ast as A
from . import ir
from .ir import NULL, Const, Instr, IRFunction, IRProgram, Var
from .parser import parse

NONDET = {"__VERIFIER_nondet_int": "int", "__VERIFIER_nondet_bool": "bool"}


@dataclass
class SourceProgram:
    files: list[tuple[str, str]]  # (path, text)
    entry_name: str | None = None


@dataclass(eq=False)
class Label:
    pos: int | None = None
    uses: list = field(default_factory=list)


def _where(pos: A.Pos) -> str:
    return f"{pos.file}:{pos.line}:{pos.col}"


class _FunctionLowerer:
    def __init__(self, prog: "_ProgramLowerer", fn: A.FuncDef):
        self.p = prog
        self.fn = fn
        self.code: list[dict] = []
        self.locals: dict[str, str] = {}
        self.named_labels: dict[str, Label] = {}
        self.pending: list[Label] = []
        self.temp_counter = 0

    # emission

    def emit(self, kind: str, pos: A.Pos, **kw) -> None:
        for lab in self.pending:
            lab.pos = len(self.code)
        self.pending = []
        kw.setdefault("file", pos.file)
        self.code.append(dict(kind=kind, line=pos.line, **kw))

    def place(self, label: Label) -> None:
        self.pending.append(label)

    def terminated(self) -> bool:
        return bool(self.code) and not self.pending and self.code[-1]["kind"] in ir.NO_FALLTHROUGH

    def temp(self, typ: str) -> str:
        while True:
            self.temp_counter += 1
            name = f"{ir.TEMP_PREFIX}{self.temp_counter}"
            if name not in self.locals and name not in self.p.globals:
                self.locals[name] = typ
                return name

    # names and types

    def declare(self, name: str, typ: str, pos: A.Pos) -> None:
        if name in self.locals:
            raise DfcTypeError(f"{_where(pos)}: '{name}' redeclared")
        if name in self.p.signatures:
            raise DfcTypeError(f"{_where(pos)}: '{name}' is a function")
        self.locals[name] = typ
        if name.startswith(ir.TEMP_PREFIX):
            try:
                self.temp_counter = max(self.temp_counter, int(name[len(ir.TEMP_PREFIX):]))
            except ValueError:
                pass

    def lookup(self, name: str, pos: A.Pos) -> str:
        if name in self.locals:
            return self.locals[name]
        if name in self.p.globals:
            return self.p.globals[name]
        raise UnresolvedName(f"{_where(pos)}: undeclared variable '{name}'")

    def typeof(self, e) -> str:
        if isinstance(e, A.IntLit):
            if not INT_MIN <= e.value <= INT_MAX:
                raise DfcSyntaxError("integer literal out of range", e.pos.file, e.pos.line, e.pos.col)
            return "int"
        if isinstance(e, A.BoolLit):
            return "bool"
        if isinstance(e, A.NullLit):
            return "null"
        if isinstance(e, A.Name):
            return self.lookup(e.id, e.pos)
        if isinstance(e, A.Unary):
            t = self.typeof(e.operand)
            if e.op == "neg":
                self.require(t, "int", e)
                return "int"
            if e.op == "!":
                if t not in ("bool", "int"):
                    raise DfcTypeError(f"{_where(e.pos)}: '!' needs a bool operand")
                return "bool"
            if e.op == "&":
                if t != "int":
                    raise UnsupportedConstruct(f"{_where(e.pos)}: only the address of an int variable can be taken")
                return "int*"
            if e.op == "*":
                if t != "int*":
                    raise DfcTypeError(f"{_where(e.pos)}: dereference of non-pointer")
                return "int"
        if isinstance(e, A.Binary):
            lt, rt = self.typeof(e.left), self.typeof(e.right)
            if e.op in ARITH:
                if "int*" in (lt, rt) or "null" in (lt, rt):
                    raise UnsupportedConstruct(f"{_where(e.pos)}: pointer arithmetic is not supported")
                self.require(lt, "int", e)
                self.require(rt, "int", e)
                return "int"
            if e.op in COMPARE:
                ptr = {"int*", "null"}
                if lt in ptr and rt in ptr:
                    if e.op not in ("==", "!="):
                        raise UnsupportedConstruct(f"{_where(e.pos)}: ordered pointer comparison is not supported")
                    return "bool"
                if lt == rt == "bool" and e.op in ("==", "!="):
                    return "bool"
                self.require(lt, "int", e)
                self.require(rt, "int", e)
                return "bool"
            if e.op in ("&&", "||"):
                for t in (lt, rt):
                    if t not in ("bool", "int"):
                        raise DfcTypeError(f"{_where(e.pos)}: '{e.op}' needs bool operands")
                return "bool"
        if isinstance(e, A.Call):
            if e.name in NONDET:
                return NONDET[e.name]
            ret, params = self.signature(e)
            if len(params) != len(e.args):
                raise DfcTypeError(f"{_where(e.pos)}: '{e.name}' expects {len(params)} arguments")
            for (pt, _), a in zip(params, e.args):
                self.assignable(pt, self.typeof(a), a)
            return ret
        raise DfcTypeError(f"{_where(e.pos)}: unsupported expression")

    def signature(self, e: A.Call):
        if e.name not in self.p.signatures:
            raise UnresolvedName(f"{_where(e.pos)}: undeclared function '{e.name}'")
        if e.name == self.p.entry:
            raise UnsupportedConstruct(f"{_where(e.pos)}: the entry function cannot be called")
        return self.p.signatures[e.name]

    @staticmethod
    def require(got: str, want: str, e) -> None:
        if got != want:
            raise DfcTypeError(f"{_where(e.pos)}: expected {want}, got {got}")

    def assignable(self, target: str, got: str, e) -> None:
        if target == got or (target == "int*" and got == "null"):
            return
        if target == "int*" and got == "int" and isinstance(e, A.IntLit) and e.value == 0:
            return
        raise DfcTypeError(f"{_where(e.pos)}: cannot assign {got} to {target}")

    # expressions

    def atom(self, e, want: str | None = None):
        """Lower ``e`` to an operand, spilling into a temporary if needed."""
        if isinstance(e, A.IntLit):
            self.typeof(e)
            if want == "int*":
                return NULL
            return Const(e.value)
        if isinstance(e, A.BoolLit):
            return Const(e.value)
        if isinstance(e, A.NullLit):
            return NULL
        if isinstance(e, A.Name):
            self.lookup(e.id, e.pos)
            return Var(e.id)
        t = self.typeof(e)
        if t == "void":
            raise DfcTypeError(f"{_where(e.pos)}: void value used")
        if isinstance(e, A.Call) and e.name in NONDET:
            raise UnsupportedConstruct(f"{_where(e.pos)}: nondet calls must initialise a variable directly")
        tmp = self.temp(t)
        self.lower_into(tmp, e, e.pos)
        return Var(tmp)

    def lower_into(self, dst: str, e, pos: A.Pos) -> None:
        dtype = self.lookup(dst, pos)
        etype = self.typeof(e)
        if isinstance(e, A.Call) and e.name in NONDET:
            self.require(etype, dtype, e)
            self.input(dst, dtype, pos)
            return
        self.assignable(dtype, etype, e)
        if isinstance(e, (A.IntLit, A.BoolLit, A.NullLit, A.Name)):
            src = self.atom(e, dtype)
            self.emit(ir.PCOPY if dtype == "int*" else ir.ASSIGN, pos, dst=dst, args=(src,))
        elif isinstance(e, A.Unary):
            if e.op == "&":
                self.emit(ir.ADDR, pos, dst=dst, args=(Var(e.operand.id),))
            elif e.op == "*":
                self.emit(ir.LOAD, pos, dst=dst, args=(self.atom(e.operand),))
            elif e.op == "!" and self.typeof(e.operand) == "int":
                self.emit(ir.ASSIGN, pos, dst=dst, op="==", args=(self.atom(e.operand), Const(0)))
            else:
                self.emit(ir.ASSIGN, pos, dst=dst, op=e.op, args=(self.atom(e.operand),))
        elif isinstance(e, A.Binary) and e.op in ("&&", "||"):
            lt, lf, end = Label(), Label(), Label()
            self.cond(e, lt, lf, pos)
            self.place(lt)
            self.emit(ir.ASSIGN, pos, dst=dst, args=(Const(True),))
            self.emit(ir.GOTO, pos, targets=(end,))
            self.place(lf)
            self.emit(ir.ASSIGN, pos, dst=dst, args=(Const(False),))
            self.place(end)
        elif isinstance(e, A.Binary):
            ptr = {self.typeof(e.left), self.typeof(e.right)} & {"int*", "null"}
            a = self.atom(e.left, "int*" if ptr else None)
            b = self.atom(e.right, "int*" if ptr else None)
            self.emit(ir.ASSIGN, pos, dst=dst, op=e.op, args=(a, b))
        elif isinstance(e, A.Call):
            ret, params = self.signature(e)
            args = tuple(self.atom(a, pt) for (pt, _), a in zip(params, e.args))
            self.emit(ir.CALL, pos, dst=dst, callee=e.name, args=args)
        else:
            raise DfcTypeError(f"{_where(pos)}: unsupported expression")

    def cond(self, e, lt: Label, lf: Label, pos: A.Pos) -> None:
        t = self.typeof(e)
        if isinstance(e, A.Binary) and e.op == "&&":
            mid = Label()
            self.cond(e.left, mid, lf, pos)
            self.place(mid)
            self.cond(e.right, lt, lf, pos)
        elif isinstance(e, A.Binary) and e.op == "||":
            mid = Label()
            self.cond(e.left, lt, mid, pos)
            self.place(mid)
            self.cond(e.right, lt, lf, pos)
        elif isinstance(e, A.Unary) and e.op == "!":
            self.cond(e.operand, lf, lt, pos)
        elif isinstance(e, A.Binary) and e.op in COMPARE:
            lty, rty = self.typeof(e.left), self.typeof(e.right)
            ptr = lty in ("int*", "null") or rty in ("int*", "null")
            a = self.atom(e.left, "int*" if ptr else None)
            b = self.atom(e.right, "int*" if ptr else None)
            self.emit(ir.BRANCH, pos, op=e.op, args=(a, b), targets=(lt, lf))
        elif t == "bool":
            self.emit(ir.BRANCH, pos, args=(self.atom(e),), targets=(lt, lf))
        elif t == "int":
            self.emit(ir.BRANCH, pos, op="!=", args=(self.atom(e), Const(0)), targets=(lt, lf))
        elif t == "int*":
            self.emit(ir.BRANCH, pos, op="!=", args=(self.atom(e), NULL), targets=(lt, lf))
        else:
            raise DfcTypeError(f"{_where(pos)}: condition of type {t}")

    def input(self, name: str, typ: str, pos: A.Pos) -> None:
        if typ not in ("int", "bool"):
            raise UnsupportedConstruct(f"{_where(pos)}: inputs must be int or bool")
        self.p.register_input(name, typ, pos)
        self.emit(ir.INPUT, pos, dst=name)

    # statements

    def stmt(self, s) -> None:
        if isinstance(s, A.Block):
            for x in s.stmts:
                self.stmt(x)
        elif isinstance(s, A.VarDecl):
            self.declare(s.name, s.type, s.pos)
            if s.is_input:
                self.input(s.name, s.type, s.pos)
            elif s.init is not None:
                self.lower_into(s.name, s.init, s.pos)
        elif isinstance(s, A.Assign):
            self.assign(s)
        elif isinstance(s, A.ExprStmt):
            e = s.expr
            if e.name in NONDET:
                raise UnsupportedConstruct(f"{_where(s.pos)}: nondet calls must initialise a variable directly")
            _, params = self.signature(e)
            self.typeof(e)
            args = tuple(self.atom(a, pt) for (pt, _), a in zip(params, e.args))
            self.emit(ir.CALL, s.pos, callee=e.name, args=args)
        elif isinstance(s, A.If) and isinstance(s.then, A.Goto) and (s.orelse is None or isinstance(s.orelse, A.Goto)):
            # "if (c) goto A; else goto B;" is a single branch
            lf = self.named(s.orelse.label) if s.orelse is not None else Label()
            self.cond(s.cond, self.named(s.then.label), lf, s.pos)
            if s.orelse is None:
                self.place(lf)
        elif isinstance(s, A.If):
            lt, lf = Label(), Label()
            self.cond(s.cond, lt, lf, s.pos)
            self.place(lt)
            self.stmt(s.then)
            if s.orelse is None:
                self.place(lf)
            else:
                end = Label()
                if not self.terminated():
                    self.emit(ir.GOTO, s.else_pos or s.pos, targets=(end,))
                self.place(lf)
                self.stmt(s.orelse)
                self.place(end)
        elif isinstance(s, A.While):
            head, body, out = Label(), Label(), Label()
            self.place(head)
            self.cond(s.cond, body, out, s.pos)
            self.place(body)
            self.stmt(s.body)
            if not self.terminated():
                self.emit(ir.GOTO, s.end_pos or s.pos, targets=(head,))
            self.place(out)
        elif isinstance(s, A.Return):
            rt = self.p.signatures[self.fn.name][0]
            if s.value is None:
                if rt != "void":
                    raise DfcTypeError(f"{_where(s.pos)}: missing return value")
                self.emit(ir.RETURN, s.pos)
            else:
                if rt == "void":
                    raise DfcTypeError(f"{_where(s.pos)}: void function returns a value")
                self.assignable(rt, self.typeof(s.value), s.value)
                self.emit(ir.RETURN, s.pos, args=(self.atom(s.value, rt),))
        elif isinstance(s, A.Abort):
            self.emit(ir.ABORT, s.pos)
        elif isinstance(s, A.ErrorStmt):
            self.emit(ir.ERROR, s.pos)
        elif isinstance(s, A.Goto):
            self.emit(ir.GOTO, s.pos, targets=(self.named(s.label),))
        elif isinstance(s, A.Labeled):
            lab = self.named(s.label)
            if lab.pos is not None or lab in self.pending or getattr(lab, "placed", False):
                raise DfcTypeError(f"{_where(s.pos)}: duplicate label '{s.label}'")
            lab.placed = True
            self.place(lab)
            self.stmt(s.stmt)
        else:
            raise UnsupportedConstruct(f"unsupported statement {type(s).__name__}")

    def named(self, name: str) -> Label:
        if name not in self.named_labels:
            self.named_labels[name] = Label()
        return self.named_labels[name]

    def assign(self, s: A.Assign) -> None:
        tgt = s.target
        if isinstance(tgt, A.Name):
            typ = self.lookup(tgt.id, tgt.pos)
            if s.op is None:
                self.lower_into(tgt.id, s.value, s.pos)
                return
            if typ != "int":
                raise UnsupportedConstruct(f"{_where(s.pos)}: pointer arithmetic is not supported")
            self.require(self.typeof(s.value), "int", s.value)
            t = self.temp("int")
            self.emit(ir.ASSIGN, s.pos, dst=t, op=s.op, args=(Var(tgt.id), self.atom(s.value)))
            self.emit(ir.ASSIGN, s.pos, dst=tgt.id, args=(Var(t),))
            return
        ptr = tgt.operand
        if self.lookup(ptr.id, ptr.pos) != "int*":
            raise DfcTypeError(f"{_where(s.pos)}: dereference of non-pointer")
        self.require(self.typeof(s.value), "int", s.value)
        if s.op is None:
            val = self.atom(s.value)
        else:
            old = self.temp("int")
            self.emit(ir.LOAD, s.pos, dst=old, args=(Var(ptr.id),))
            rhs = self.atom(s.value)
            val = Var(self.temp("int"))
            self.emit(ir.ASSIGN, s.pos, dst=val.name, op=s.op, args=(Var(old), rhs))
        self.emit(ir.STORE, s.pos, args=(Var(ptr.id), val))

    # driver

    def run(self) -> IRFunction:
        fn = self.fn
        ret, params = self.p.signatures[fn.name]
        is_entry = fn.name == self.p.entry
        for i, prm in enumerate(fn.params):
            self.declare(prm.name, prm.type, prm.pos)
            if is_entry:
                if prm.type not in ("int", "bool"):
                    raise UnsupportedConstruct(f"{_where(prm.pos)}: entry parameters must be int or bool")
                self.p.register_input(prm.name, prm.type, prm.pos)
            self.emit(ir.PARAM, fn.pos, dst=prm.name, args=(Const(i),))
        if is_entry:
            for g in self.p.global_decls:
                if not g.is_input and g.init is not None:
                    self.emit(ir.PCOPY if g.type == "int*" else ir.ASSIGN, g.pos, dst=g.name,
                              args=(self.p.global_init(g),), init=True)
            for g in self.p.global_decls:
                if g.is_input:
                    self.input(g.name, g.type, g.pos)
        self.stmt(fn.body)
        end = fn.body.end_pos or fn.pos
        if self.pending or not self.code or self.code[-1]["kind"] not in ir.NO_FALLTHROUGH:
            if ret == "void":
                self.emit(ir.RETURN, end)
            else:
                self.emit(ir.RETURN, end, args=(Const(False) if ret == "bool" else Const(0),))
        for name, lab in self.named_labels.items():
            if lab.pos is None:
                raise UnresolvedName(f"{_where(fn.pos)}: undefined label '{name}' in {fn.name}")
        instrs = []
        for c in self.code:
            if c.get("targets"):
                c["targets"] = tuple(t.pos for t in c["targets"])
            instrs.append(Instr(**c))
        return IRFunction(fn.name, ret, tuple((p.name, p.type) for p in fn.params), dict(self.locals),
                          tuple(instrs), fn.pos.line, end.line, fn.pos.file)


class _ProgramLowerer:
    def __init__(self, programs: list[A.Program], entry: str | None):
        self.global_decls: list[A.VarDecl] = []
        self.globals: dict[str, str] = {}
        self.signatures: dict[str, tuple[str, tuple]] = {}
        self.fndefs: list[A.FuncDef] = []
        pragma = None
        for p in programs:
            pragma = pragma or p.entry
            for g in p.globals:
                if g.name in self.globals:
                    raise DfcTypeError(f"{_where(g.pos)}: global '{g.name}' redeclared")
                self.globals[g.name] = g.type
                self.global_decls.append(g)
            for f in p.functions:
                if f.name in self.signatures or f.name in self.globals:
                    raise DfcTypeError(f"{_where(f.pos)}: '{f.name}' redefined")
                if f.ret_type == "int*":
                    raise UnsupportedConstruct(f"{_where(f.pos)}: functions cannot return pointers")
                self.signatures[f.name] = (f.ret_type, tuple((p.type, p.name) for p in f.params))
                self.fndefs.append(f)
        names = [f.name for f in self.fndefs]
        if entry is None:
            entry = pragma
        if entry is None:
            if "main" in names:
                entry = "main"
            elif len(names) == 1:
                entry = names[0]
        if entry is None or entry not in names:
            raise DfcSyntaxError(f"no entry function{'' if entry is None else ' ' + repr(entry)}")
        self.entry = entry
        self.inputs: dict[str, str] = {}

    def register_input(self, name: str, typ: str, pos: A.Pos) -> None:
        if name in self.inputs:
            raise DfcTypeError(f"{_where(pos)}: input '{name}' declared twice")
        self.inputs[name] = typ

    def global_init(self, g: A.VarDecl):
        e = g.init
        if e is None:
            return NULL if g.type == "int*" else Const(False if g.type == "bool" else 0)
        if isinstance(e, A.IntLit) and g.type == "int":
            if not INT_MIN <= e.value <= INT_MAX:
                raise DfcSyntaxError("integer literal out of range", e.pos.file, e.pos.line, e.pos.col)
            return Const(e.value)
        if isinstance(e, A.BoolLit) and g.type == "bool":
            return Const(e.value)
        if g.type == "int*" and (isinstance(e, A.NullLit) or (isinstance(e, A.IntLit) and e.value == 0)):
            return NULL
        raise DfcTypeError(f"{_where(g.pos)}: global initialiser must be a constant of type {g.type}")

    def run(self, sources: dict[str, str]) -> IRProgram:
        entry_def = next(f for f in self.fndefs if f.name == self.entry)
        order = [entry_def] + [f for f in self.fndefs if f is not entry_def]
        funcs = {}
        for f in order:
            funcs[f.name] = _FunctionLowerer(self, f).run()
        # keep declaration order for deterministic output
        funcs = {f.name: funcs[f.name] for f in self.fndefs}
        return IRProgram(funcs, dict(self.globals), self.entry, dict(self.inputs), sources)


def lower(programs: A.Program | list[A.Program], entry: str | None = None,
          sources: dict[str, str] | None = None) -> IRProgram:
    if isinstance(programs, A.Program):
        programs = [programs]
    return _ProgramLowerer(programs, entry).run(sources or {})


def load(source: SourceProgram | str, entry: str | None = None, file: str = "<input>") -> IRProgram:
    """Parse and lower either a ``SourceProgram`` or a single source string."""
    if isinstance(source, str):
        source = SourceProgram([(file, source)], entry)
    asts = [parse(text, path) for path, text in source.files]
    return lower(asts, source.entry_name or entry, dict(source.files))


def load_files(paths, entry: str | None = None) -> IRProgram:
    files = []
    for p in paths:
        with open(p) as fh:
            files.append((str(p), fh.read()))
    return load(SourceProgram(files, entry))
