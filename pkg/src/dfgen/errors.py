"""Exception hierarchy shared by every dfgen module."""

from __future__ import annotations


class DfgenError(Exception):
    """Base class; the CLI maps these to exit code 1."""


class DfcSyntaxError(DfgenError):
    def __init__(self, message: str, file: str = "<input>", line: int = 0, col: int = 0):
        self.file, self.line, self.col = file, line, col
        super().__init__(f"{file}:{line}:{col}: {message}")


class UnresolvedName(DfgenError):
    pass


class DfcTypeError(DfgenError):
    pass


class UnsupportedConstruct(DfgenError):
    pass


class NoDominator(DfgenError):
    pass


class EmptyWorklist(DfgenError):
    pass


class PathBudgetExceeded(DfgenError):
    pass


class RuntimeTrap(DfgenError):
    """Concrete execution hit division by zero or a null dereference."""
