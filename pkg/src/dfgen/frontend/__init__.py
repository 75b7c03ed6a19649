"""Parsing, lowering and printing of .dfc programs."""

from .ir import IRFunction, IRProgram, Instr, Site, is_temp
from .lower import SourceProgram, load, load_files, lower
from .parser import parse
from .printer import print_program

__all__ = [
    "IRFunction", "IRProgram", "Instr", "Site", "SourceProgram", "is_temp",
    "load", "load_files", "lower", "parse", "print_program",
]
