"""Three-address intermediate representation.

Each function owns a flat tuple of instructions addressed by index; a
``Site`` pairs a function name with such an index and is the label used by
every analysis. Every instruction records the source line it came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

PARAM = "param"
INPUT = "input"
ASSIGN = "assign"
ADDR = "addr"
PCOPY = "pcopy"
LOAD = "load"
STORE = "store"
BRANCH = "branch"
GOTO = "goto"
CALL = "call"
RETURN = "return"
ABORT = "abort"
ERROR = "error"

KINDS = (PARAM, INPUT, ASSIGN, ADDR, PCOPY, LOAD, STORE, BRANCH, GOTO, CALL, RETURN, ABORT, ERROR)
TERMINATORS = (GOTO, RETURN, ABORT, ERROR)
NO_FALLTHROUGH = TERMINATORS + (BRANCH,)
TEMP_PREFIX = "__t"


class Site(NamedTuple):
    func: str
    index: int

    def __str__(self) -> str:
        return f"{self.func}:{self.index}"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: int | bool | None  # None is the null pointer

    def __str__(self) -> str:
        if self.value is None:
            return "0"
        if isinstance(self.value, bool):
            return "true" if self.value else "false"
        return str(self.value)


Operand = Var | Const
NULL = Const(None)


@dataclass(frozen=True)
class Instr:
    kind: str
    line: int
    dst: str | None = None
    op: str | None = None
    args: tuple = ()
    targets: tuple[int, ...] = ()
    callee: str | None = None
    init: bool = False  # global initializer placed in the entry prologue
    file: str = ""

    def reads(self) -> list[str]:
        """Variables whose value the instruction reads (not through pointers)."""
        return [a.name for a in self.args if isinstance(a, Var)] if self.kind != ADDR else []

    def writes(self) -> str | None:
        """Variable directly written, if any (stores write through a pointer)."""
        if self.kind in (PARAM, INPUT, ASSIGN, ADDR, PCOPY, LOAD):
            return self.dst
        if self.kind == CALL:
            return self.dst
        return None

    def structure(self) -> tuple:
        """Everything except the source position."""
        return (self.kind, self.dst, self.op, self.args, self.targets, self.callee, self.init)


def is_temp(name: str) -> bool:
    return name.startswith(TEMP_PREFIX)


@dataclass
class IRFunction:
    name: str
    ret_type: str
    params: tuple[tuple[str, str], ...]
    locals: dict[str, str]  # includes params and temporaries
    instrs: tuple[Instr, ...]
    line: int
    end_line: int
    file: str = ""

    def successors(self, idx: int) -> tuple[int, ...]:
        ins = self.instrs[idx]
        if ins.kind in (BRANCH, GOTO):
            return ins.targets
        if ins.kind in (RETURN, ABORT, ERROR):
            return ()
        return (idx + 1,) if idx + 1 < len(self.instrs) else ()

    @property
    def prologue_len(self) -> int:
        n = 0
        for ins in self.instrs:
            if ins.kind in (PARAM, INPUT) or ins.init:
                n += 1
            else:
                break
        return n

    @property
    def body_entry(self) -> int:
        return min(self.prologue_len, len(self.instrs) - 1)


@dataclass
class IRProgram:
    functions: dict[str, IRFunction]
    globals: dict[str, str]
    entry: str
    inputs: dict[str, str]  # symbolic input name -> type, in declaration order
    sources: dict[str, str] = field(default_factory=dict)

    def instr(self, site: Site) -> Instr:
        return self.functions[site.func].instrs[site.index]

    def line_of(self, site: Site) -> int:
        return self.instr(site).line

    def file_of(self, site: Site) -> str:
        return self.instr(site).file or self.functions[site.func].file

    def sites(self):
        for f in self.functions.values():
            for i in range(len(f.instrs)):
                yield Site(f.name, i)

    def scope(self, func: str, name: str) -> str | None:
        """``func`` if ``name`` is local to it, ``None`` if global."""
        if name in self.functions[func].locals:
            return func
        if name in self.globals:
            return None
        raise KeyError(name)

    def var_type(self, func: str, name: str) -> str:
        f = self.functions[func]
        return f.locals[name] if name in f.locals else self.globals[name]

    def entry_site(self) -> Site:
        return Site(self.entry, 0)

    def body_entry_site(self, func: str | None = None) -> Site:
        f = self.functions[func or self.entry]
        return Site(f.name, f.body_entry)

    def address_taken(self) -> set[tuple[str | None, str]]:
        """(scope, name) of every variable whose address is taken."""
        out = set()
        for f in self.functions.values():
            for ins in f.instrs:
                if ins.kind == ADDR:
                    name = ins.args[0].name
                    out.add((self.scope(f.name, name), name))
        return out

    def structure(self) -> tuple:
        return (
            self.entry,
            tuple(sorted(self.globals.items())),
            tuple(
                (f.name, f.ret_type, f.params, tuple(i.structure() for i in f.instrs))
                for f in self.functions.values()
            ),
        )
