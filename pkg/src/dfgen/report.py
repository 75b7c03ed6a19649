"""Campaign reports as JSON, CSV and Markdown.

JSON output has a fixed key order and rounded floats, so dumping a parsed
report reproduces the original text byte for byte. The schema lives in
``schemas/report.schema.json``.
"""

from __future__ import annotations

import csv
import io
import json
from importlib import resources

from .hybrid import CampaignReport, PairOutcome
from .verdict import Verdict

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "markdown")
SUMMARY_COLUMNS = ["program", "pairs", "F", "I", "IWB", "U", "coverage", "time_ms"]
PAIR_COLUMNS = ["id", "def", "use", "var", "kind", "verdict", "engine", "test", "time_ms", "steps"]


def _ms(x: float) -> float:
    return round(float(x), 3)


def summary(report: CampaignReport) -> dict:
    return {
        "pairs": len(report.outcomes),
        "feasible": report.n_feasible,
        "infeasible": report.n_infeasible,
        "infeasible_within_bound": report.n_within_bound,
        "unknown": report.n_unknown,
        "coverage": round(report.coverage(), 6),
        "total_time_ms": _ms(report.total_time_ms),
    }


def to_dict(report: CampaignReport) -> dict:
    pairs = []
    for desc in report.pairs:
        o = report.outcomes[desc["id"]]
        entry = dict(desc)
        entry.update({
            "verdict": o.verdict.to_dict(),
            "time_ms": _ms(o.time_ms),
            "steps": o.steps,
            "resolved_round": o.resolved_round,
            "attempts": [dict(a, time_ms=_ms(a["time_ms"])) for a in o.attempts],
        })
        pairs.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "program": report.program,
        "config": report.config,
        "bounds": list(report.bounds) if report.bounds else None,
        "bounds_search_exhausted": report.bounds_search_exhausted,
        "summary": summary(report),
        "rounds": [dict(r, coverage=round(r["coverage"], 6)) for r in report.rounds],
        "pairs": pairs,
        "inconsistencies": report.inconsistencies,
    }


def from_dict(d: dict) -> CampaignReport:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema version {d.get('schema_version')!r}")
    descs, outcomes = [], {}
    keys = ("verdict", "time_ms", "steps", "resolved_round", "attempts")
    for entry in d["pairs"]:
        descs.append({k: v for k, v in entry.items() if k not in keys})
        outcomes[entry["id"]] = PairOutcome(entry["id"], Verdict.from_dict(entry["verdict"]), entry["time_ms"],
                                            entry["steps"], entry["resolved_round"], entry["attempts"])
    b = d.get("bounds")
    return CampaignReport(d["program"], descs, outcomes, d["config"], d["rounds"], d["inconsistencies"],
                          d["summary"]["total_time_ms"], tuple(b) if b else None, d["bounds_search_exhausted"])


def dumps(report: CampaignReport) -> str:
    return json.dumps(to_dict(report), indent=2) + "\n"


def loads(text: str) -> CampaignReport:
    return from_dict(json.loads(text))


def schema() -> dict:
    return json.loads(resources.files("dfgen").joinpath("schemas/report.schema.json").read_text())


def _summary_row(r: CampaignReport) -> list:
    s = summary(r)
    return [r.program, s["pairs"], s["feasible"], s["infeasible"], s["infeasible_within_bound"], s["unknown"],
            f"{s['coverage']:.4f}", f"{s['total_time_ms']:.1f}"]


def _pair_rows(r: CampaignReport) -> list[list]:
    rows = []
    for desc in r.pairs:
        o = r.outcomes[desc["id"]]
        edge = desc.get("edge") or ""
        test = "" if o.verdict.test is None else " ".join(f"{k}={v}" for k, v in o.verdict.test.items())
        rows.append([desc["id"], f"l{desc['def']['line']}", f"l{desc['use']['line']}{edge}", desc["var"],
                     desc["kind"], o.verdict.status, o.verdict.engine, test, f"{o.time_ms:.1f}", o.steps])
    return rows


def emit_report(report, fmt: str = "json") -> str:
    """Render one report, or a list of them for the summary formats."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    reports = report if isinstance(report, list) else [report]
    if fmt == "json":
        if isinstance(report, list):
            return json.dumps([to_dict(r) for r in reports], indent=2) + "\n"
        return dumps(report)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in reports:
            w.writerow(_summary_row(r))
        return buf.getvalue()
    lines = ["| " + " | ".join(SUMMARY_COLUMNS) + " |", "|" + "---|" * len(SUMMARY_COLUMNS)]
    for r in reports:
        lines.append("| " + " | ".join(str(c) for c in _summary_row(r)) + " |")
    for r in reports:
        lines += ["", f"### {r.program}", "", "| " + " | ".join(PAIR_COLUMNS) + " |",
                  "|" + "---|" * len(PAIR_COLUMNS)]
        for row in _pair_rows(r):
            lines.append("| " + " | ".join(str(c) for c in row) + " |")
        for inc in r.inconsistencies:
            lines.append(f"\n{inc['kind']} inconsistency on {inc['pair']}: "
                         f"{inc['feasible']['engine']} Feasible vs {inc['infeasible']['engine']} "
                         f"{inc['infeasible']['status']}")
    return "\n".join(lines) + "\n"
