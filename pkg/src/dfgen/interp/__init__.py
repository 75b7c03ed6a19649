"""Concrete execution, coverage measurement and bounded path enumeration."""

from .coverage import CoverageMonitor, covers, measure_coverage, replay_covers
from .interpreter import DEFAULT_FUEL, Step, Trace, run
from .enumerate import Enumeration, PathRecord, enumerate_paths

__all__ = ["CoverageMonitor", "DEFAULT_FUEL", "Enumeration", "PathRecord", "Step", "Trace", "covers", "enumerate_paths",
           "measure_coverage", "replay_covers", "run"]
