"""Symbolic execution with pluggable search strategies."""

from .engine import Budget, PairSearch, run_pair
from .search import STRATEGIES, weight
from .solver import Solver, solve

__all__ = ["Budget", "PairSearch", "STRATEGIES", "Solver", "run_pair", "solve", "weight"]
