"""C99 rendering of instrumented programs for external model checkers.

The body is the canonical IR printout, which the .dfc frontend accepts, so
an exported file can be loaded back. Preprocessor lines are ignored by the
frontend; they only make the text a complete C translation unit.
"""

from __future__ import annotations

from ..errors import UnsupportedConstruct
from ..frontend import ir
from ..frontend.printer import _decl, print_program
from .instrument import InstrumentedProgram

STYLES = ("assert", "label")

VERDICT_MAP = {"safe": "Infeasible", "counterexample": "Feasible", "unknown": "Unknown"}

_PRELUDE = """\
#include <assert.h>
#include <stdbool.h>
#include <stdlib.h>
extern int __VERIFIER_nondet_int(void);
extern bool __VERIFIER_nondet_bool(void);
"""


def _harness(prog: ir.IRProgram) -> list[str]:
    fn = prog.functions[prog.entry]
    args = ", ".join(f"__VERIFIER_nondet_{'bool' if t == 'bool' else 'int'}()" for _, t in fn.params)
    call = f"{fn.name}({args});"
    return ["", "int main(void)", "{", f"  {call}", "  return 0;", "}"]


def export_c(ip: InstrumentedProgram, style: str = "assert", harness: bool = False) -> str:
    """C text for ``ip``. ``style`` renders the error site as ``assert(0)``
    or as a jump target labelled ``ERROR`` calling ``__VERIFIER_error``.
    ``harness`` adds a ``main`` that calls the entry function on
    nondeterministic arguments for tools that start at ``main``; that variant
    is for compilers only, since the frontend forbids calls to the entry."""
    return export_program(ip.prog, style, harness)


def export_program(prog: ir.IRProgram, style: str = "assert", harness: bool = False) -> str:
    """Same rendering for an arbitrary IR program."""
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}")
    head = _PRELUDE
    if style == "label":
        head += "extern void __VERIFIER_error(void);\n"
    protos = [f"{_decl(fn.ret_type, fn.name)}({', '.join(_decl(t, n) for n, t in fn.params) or 'void'});"
              for fn in prog.functions.values()]
    body = print_program(prog, error_style=style)
    text = head + "\n" + "\n".join(protos) + "\n\n" + body
    if harness and prog.entry != "main":
        for name, t in prog.functions[prog.entry].params:
            if t == "int*":
                raise UnsupportedConstruct(f"entry parameter {name} is a pointer; no harness can supply it")
        text += "\n".join(_harness(prog)) + "\n"
    return text
