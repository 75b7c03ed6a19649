"""Command-line interface.

Exit codes: 0 on success, 1 when the analysis fails (bad program, engine
error), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import report as report_mod
from .bench import BENCH_COLUMNS, compare_strategies
from .checker import CheckBounds, bmc_check, export_c, instrument
from .context import ProgramContext
from .errors import DfgenError
from .frontend import load_files
from .hybrid import CampaignConfig, run_campaign
from .interp import measure_coverage, run
from .manifest import load_manifest
from .symexec import STRATEGIES, Budget, run_pair

STRATEGY_ALIASES = {"cos": "rss-md2u"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed_default() -> int:
    raw = os.environ.get("DFGEN_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DFGEN_SEED must be an integer, got {raw!r}") from None


def _strategy(name: str) -> str:
    name = STRATEGY_ALIASES.get(name, name)
    if name not in STRATEGIES:
        raise argparse.ArgumentTypeError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")
    return name


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _inputs(text: str) -> dict:
    out = {}
    for item in filter(None, (x.strip() for x in text.split(","))):
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"expected name=value, got {item!r}")
        k, v = item.split("=", 1)
        v = v.strip().lower()
        out[k.strip()] = True if v == "true" else False if v == "false" else int(v, 0)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dfgen", description="Data-flow test generation for .dfc programs.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def program_args(sp):
        sp.add_argument("files", nargs="+", help=".dfc source files")
        sp.add_argument("--entry", help="entry function (default: main, or the only function)")
        sp.add_argument("--include-params", action="store_true", help="treat parameters as definitions")

    sp = sub.add_parser("pairs", help="list def-use pairs as JSON")
    program_args(sp)

    sp = sub.add_parser("graph", help="dump the interprocedural CFG")
    program_args(sp)
    sp.add_argument("--dot", action="store_true", help="DOT output (the only format)")

    sp = sub.add_parser("run", help="execute concretely")
    program_args(sp)
    sp.add_argument("--input", type=_inputs, default={}, help="name=value,...")
    sp.add_argument("--trace", action="store_true", help="print one JSON line per executed label")

    sp = sub.add_parser("se", help="symbolic execution for one pair")
    program_args(sp)
    sp.add_argument("--pair", required=True)
    sp.add_argument("--strategy", type=_strategy, default="cpgs")
    sp.add_argument("--max-steps", type=int, default=2000, help="state selections")
    sp.add_argument("--timeout", type=float, default=None, help="seconds")
    sp.add_argument("--unwind", type=int, default=16, help="loop iterations per state")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--tie-break", choices=("random", "paper"), default="random")
    sp.add_argument("--lazy", action="store_true", help="check children when selected rather than at the fork")
    sp.add_argument("--log", action="store_true", help="include the selection log")

    sp = sub.add_parser("check", help="bounded checking for one pair")
    program_args(sp)
    sp.add_argument("--pair", required=True)
    sp.add_argument("--unwind", type=int, default=2)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--timeout", type=float, default=30.0, help="solver seconds")
    sp.add_argument("--mode", choices=("monolithic", "paths"), default="monolithic")

    sp = sub.add_parser("export", help="instrumented C source for one pair")
    program_args(sp)
    sp.add_argument("--pair", required=True)
    sp.add_argument("-o", "--output")
    sp.add_argument("--style", choices=("assert", "label"), default="assert")
    sp.add_argument("--harness", action="store_true", help="add a main() driving the entry function")

    sp = sub.add_parser("hybrid", help="combined campaign over all pairs")
    program_args(sp)
    sp.add_argument("--strategy", type=_strategy, default="cpgs")
    sp.add_argument("--schedule", type=_int_list, default=[10, 30, 90, 300], help="budget units per round")
    sp.add_argument("--unit-steps", type=int, default=10, help="state selections per budget unit")
    sp.add_argument("--unit-seconds", type=float, default=None, help="wall-clock seconds per budget unit")
    sp.add_argument("--bounds", choices=("fixed", "auto"), default="fixed")
    sp.add_argument("--unwind", type=int, default=2)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--bounds-exact", action="store_true", help="count InfeasibleWithinBound as infeasible")
    sp.add_argument("--checker-first", action="store_true")
    sp.add_argument("--no-cross-check", action="store_true")
    sp.add_argument("--engines", default="se,checker")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("-o", "--output", help="report file (JSON)")
    sp.add_argument("--csv", help="also write the summary table as CSV")
    sp.add_argument("--format", choices=report_mod.FORMATS, default="json", help="stdout format")

    sp = sub.add_parser("bench", help="compare search strategies over a corpus")
    sp.add_argument("corpus", nargs="?", help="directory with .dfc files (default: bundled corpus)")
    sp.add_argument("--strategies", default=",".join(STRATEGIES))
    sp.add_argument("--seeds", type=int, default=10, help="number of seeds")
    sp.add_argument("--seed", type=int, default=None, help="first seed")
    sp.add_argument("--max-steps", type=int, default=300)
    sp.add_argument("--feasible-only", action="store_true", help="skip pairs whose golden verdict is not Feasible")
    return p


def _context(args) -> ProgramContext:
    prog = load_files(args.files, entry=args.entry)
    return ProgramContext(prog, include_params=args.include_params)


def _pair(ctx: ProgramContext, pid: str):
    try:
        return ctx.pair(pid)
    except KeyError:
        raise DfgenError(f"no pair {pid!r}; run 'dfgen pairs' for the list") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_pairs(args, out) -> int:
    ctx = _context(args)
    out.write(_dump([ctx.describe(p) for p in ctx.pairs]))
    return 0


def cmd_graph(args, out) -> int:
    out.write(_context(args).icfg.to_dot())
    return 0


def cmd_run(args, out) -> int:
    ctx = _context(args)
    trace = run(ctx.prog, args.input)
    if args.trace:
        for st in trace.steps:
            if not st.ret:
                out.write(json.dumps({"func": st.site.func, "index": st.site.index,
                                      "line": ctx.prog.line_of(st.site), "decision": st.decision}) + "\n")
    covered = measure_coverage(ctx.prog, trace, ctx.pairs)
    value = trace.value if trace.value is None or isinstance(trace.value, (int, bool)) else str(trace.value)
    out.write(_dump({"status": trace.status, "value": value, "message": trace.message,
                     "covered": [ctx.ids[p] for p in ctx.pairs if p in covered]}))
    return 0


def cmd_se(args, out) -> int:
    ctx = _context(args)
    pair = _pair(ctx, args.pair)
    budget = Budget(selections=args.max_steps, seconds=args.timeout, unwind=args.unwind)
    r = run_pair(ctx, pair, args.strategy, budget, seed=args.seed, tie_break=args.tie_break, lazy=args.lazy,
                 log=args.log)
    obj = {"pair": args.pair, "verdict": r.verdict.status, "test": r.verdict.test, "steps": r.selections,
           "instrs": r.instrs, "paths_explored": r.paths_explored, "time_ms": round(r.time_ms, 3),
           "detail": r.verdict.to_dict()}
    if args.log:
        obj["log"] = r.log
    out.write(json.dumps(obj, indent=2, default=_jsonable) + "\n")
    return 0


def _jsonable(x):
    if x == float("inf"):
        return "inf"
    return str(x)


def cmd_check(args, out) -> int:
    ctx = _context(args)
    pair = _pair(ctx, args.pair)
    r = bmc_check(instrument(ctx.prog, pair), CheckBounds(args.unwind, args.depth),
                  timeout_ms=int(args.timeout * 1000), mode=args.mode, icfg=None)
    out.write(_dump({"pair": args.pair, "verdict": r.verdict.status, "test": r.verdict.test,
                     "steps": r.paths_explored, "instrs": 0, "paths_explored": r.paths_explored,
                     "time_ms": round(r.time_ms, 3), "detail": r.verdict.to_dict()}))
    return 0


def cmd_export(args, out) -> int:
    ctx = _context(args)
    text = export_c(instrument(ctx.prog, _pair(ctx, args.pair)), style=args.style, harness=args.harness)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return 0


def cmd_hybrid(args, out) -> int:
    ctx = _context(args)
    cfg = CampaignConfig(strategy=args.strategy, schedule=tuple(args.schedule), se_selections_per_unit=args.unit_steps,
                         seconds_per_unit=args.unit_seconds, bounds=args.bounds, unwind=args.unwind,
                         depth=args.depth, checker_first=args.checker_first, bounds_exact=args.bounds_exact,
                         cross_check=not args.no_cross_check,
                         engines=tuple(e.strip() for e in args.engines.split(",") if e.strip()),
                         seed=args.seed, jobs=args.jobs)
    name = Path(args.files[0]).stem
    rep = run_campaign(ctx, cfg=cfg, name=name)
    if args.output:
        Path(args.output).write_text(report_mod.dumps(rep))
    if args.csv:
        Path(args.csv).write_text(report_mod.emit_report(rep, "csv"))
    if not args.output or args.format != "json":
        out.write(report_mod.emit_report(rep, args.format))
    return 0


def cmd_bench(args, out) -> int:
    manifest = load_manifest(args.corpus) if args.corpus else load_manifest()
    strategies = [_strategy(s.strip()) for s in args.strategies.split(",") if s.strip()]
    programs, chosen = [], {}
    for entry in manifest:
        prog = entry.load()
        programs.append((entry.name, prog))
        if args.feasible_only and entry.golden:
            ctx = ProgramContext(prog)
            chosen[entry.name] = [p for p in ctx.pairs if entry.golden.get(ctx.ids[p]) == "Feasible"]
    seeds = range(args.seed, args.seed + args.seeds)
    stats = compare_strategies(programs, strategies, seeds, Budget(selections=args.max_steps), chosen or None)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for s in strategies:
        w.writerow(stats[s].row())
    out.write(buf.getvalue())
    return 0


COMMANDS = {"pairs": cmd_pairs, "graph": cmd_graph, "run": cmd_run, "se": cmd_se, "check": cmd_check,
            "export": cmd_export, "hybrid": cmd_hybrid, "bench": cmd_bench}


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(sys.argv[1:] if argv is None else argv)
        if args.command is None:
            raise UsageError("dfgen: a subcommand is required")
        if getattr(args, "seed", "absent") is None:
            args.seed = _seed_default()
        if args.command in ("check", "hybrid"):
            CheckBounds(args.unwind, args.depth)
    except UsageError as e:
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"{e}\n")
        return 2
    except ValueError as e:
        sys.stderr.write(f"dfgen: {e}\n")
        return 2
    try:
        return COMMANDS[args.command](args, out)
    except (DfgenError, OSError) as e:
        sys.stderr.write(f"dfgen: error: {e}\n")
        return 1
    except ValueError as e:
        sys.stderr.write(f"dfgen: error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
