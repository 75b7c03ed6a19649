"""Per-pair verdicts shared by every engine."""

from __future__ import annotations

from dataclasses import dataclass, field

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
INFEASIBLE_WITHIN_BOUND = "InfeasibleWithinBound"
UNKNOWN = "Unknown"
STATUSES = (FEASIBLE, INFEASIBLE, INFEASIBLE_WITHIN_BOUND, UNKNOWN)


@dataclass(frozen=True)
class Verdict:
    status: str
    engine: str
    test: dict | None = None
    proof: str | None = None  # how infeasibility was established
    reason: str | None = None  # why the result is Unknown
    bounds: tuple[int, int] | None = None

    @property
    def resolved(self) -> bool:
        return self.status in (FEASIBLE, INFEASIBLE)

    def to_dict(self) -> dict:
        return {"status": self.status, "engine": self.engine, "test": self.test, "proof": self.proof,
                "reason": self.reason, "bounds": list(self.bounds) if self.bounds else None}

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        b = d.get("bounds")
        return cls(d["status"], d["engine"], d.get("test"), d.get("proof"), d.get("reason"),
                   tuple(b) if b else None)


@dataclass
class EngineResult:
    verdict: Verdict
    selections: int = 0
    instrs: int = 0
    paths_explored: int = 0
    time_ms: float = 0.0
    log: list = field(default_factory=list)
    solver_queries: int = 0
