"""Pair coverage as reachability: instrumentation, bounded checking, export."""

from __future__ import annotations

from ..dataflow import DefUsePair
from ..frontend.ir import IRProgram
from ..verdict import EngineResult
from .bmc import CheckBounds, bmc_check
from .bounds import BudgetExhausted, choose_bounds, feasible_count
from .export import VERDICT_MAP, export_c, export_program
from .instrument import InstrumentedProgram, Patch, instrument


def check_pair(prog: IRProgram, pair: DefUsePair, bounds: CheckBounds | None = None, timeout_ms: int = 30_000,
               mode: str = "monolithic") -> EngineResult:
    """Instrument ``prog`` for ``pair`` and run the bounded checker."""
    return bmc_check(instrument(prog, pair), bounds, timeout_ms=timeout_ms, mode=mode)


__all__ = ["BudgetExhausted", "CheckBounds", "InstrumentedProgram", "Patch", "VERDICT_MAP", "bmc_check",
           "check_pair", "choose_bounds", "export_c", "export_program", "feasible_count", "instrument"]
