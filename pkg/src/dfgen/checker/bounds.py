"""Choice of the loop unwinding bound by binary search."""

from __future__ import annotations

import time

from ..errors import DfgenError
from ..frontend.ir import IRProgram
from ..verdict import FEASIBLE
from .bmc import CheckBounds, bmc_check
from .instrument import instrument


class BudgetExhausted(DfgenError):
    """Raised by :func:`choose_bounds` when time runs out; ``best`` holds the
    smallest bound known so far to reach the target count."""

    def __init__(self, best: CheckBounds, message: str = "bound search ran out of budget"):
        self.best = best
        super().__init__(message)


def feasible_count(prog: IRProgram, pairs, bounds: CheckBounds, timeout_ms: int = 10_000) -> int:
    n = 0
    for p in pairs:
        ip = instrument(prog, p)
        if bmc_check(ip, bounds, timeout_ms=timeout_ms).verdict.status == FEASIBLE:
            n += 1
    return n


def choose_bounds(prog: IRProgram, pairs, budget: float = 60.0, cap: int = 8, depth: int = 2,
                  timeout_ms: int = 10_000) -> CheckBounds:
    """Smallest unwind in [1, cap] whose Feasible count on ``pairs`` equals
    the count at ``cap``. ``budget`` is in seconds."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    if cap < 1:
        raise ValueError("cap must be at least 1")
    pairs = list(pairs)
    deadline = time.monotonic() + budget
    cache: dict[int, int] = {}

    def count(u: int) -> int:
        if u not in cache:
            if time.monotonic() > deadline:
                raise _OutOfTime
            cache[u] = feasible_count(prog, pairs, CheckBounds(u, depth), timeout_ms)
        return cache[u]

    lo, hi = 1, cap
    try:
        target = count(cap)
        while lo < hi:
            mid = (lo + hi) // 2
            if count(mid) >= target:
                hi = mid
            else:
                lo = mid + 1
    except _OutOfTime:
        raise BudgetExhausted(CheckBounds(hi, depth)) from None
    return CheckBounds(lo, depth)


class _OutOfTime(Exception):
    pass
