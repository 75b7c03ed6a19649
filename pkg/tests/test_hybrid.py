import pytest

from dfgen.hybrid import CampaignConfig, CampaignReport, PairOutcome, coverage, coverage_rate, cross_check, run_campaign
from dfgen.verdict import FEASIBLE, INFEASIBLE, INFEASIBLE_WITHIN_BOUND, UNKNOWN, Verdict

from conftest import corpus_context, manifest


@pytest.mark.parametrize("f, i, n, want", [(9, 2, 11, 1.0), (0, 0, 10, 0.0), (5, 2, 10, 0.625), (0, 4, 4, 1.0)])
def test_coverage_rate(f, i, n, want):
    assert coverage_rate(f, i, n) == pytest.approx(want)


def _report(statuses, exact=False):
    outcomes = {f"du{k}": PairOutcome(f"du{k}", Verdict(s, "se")) for k, s in enumerate(statuses, 1)}
    return CampaignReport("p", [], outcomes, {"bounds_exact": exact})


def test_within_bound_counts_against_coverage_unless_exact():
    statuses = [FEASIBLE] * 6 + [INFEASIBLE] * 2 + [INFEASIBLE_WITHIN_BOUND] * 2
    assert coverage(_report(statuses)) == pytest.approx(6 / 8)
    assert coverage(_report(statuses, exact=True)) == pytest.approx(1.0)


def test_cross_check_kinds():
    f = Verdict(FEASIBLE, "se", test={"x": 1})
    se = {"du1": f, "du2": f, "du3": f, "du4": Verdict(UNKNOWN, "se")}
    mc = {"du1": Verdict(INFEASIBLE, "bmc"), "du2": Verdict(INFEASIBLE_WITHIN_BOUND, "bmc"),
          "du3": Verdict(FEASIBLE, "bmc"), "du4": Verdict(INFEASIBLE, "bmc")}
    got = {(c["pair"], c["kind"]) for c in cross_check(se, mc)}
    assert got == {("du1", "hard"), ("du2", "bound-suspect")}


@pytest.mark.parametrize("schedule", [(), (3, 3), (5, 2), (0, 1)])
def test_schedule_must_increase(schedule):
    with pytest.raises(ValueError):
        CampaignConfig(schedule=schedule)


def test_unknown_engine_rejected():
    with pytest.raises(ValueError):
        CampaignConfig(engines=("se", "fuzz"))


def test_power_campaign():
    ctx = corpus_context("power")
    rep = run_campaign(ctx, cfg=CampaignConfig(schedule=(1, 3, 9)), name="power")
    golden = manifest().get("power").golden
    assert rep.n_feasible == sum(v == FEASIBLE for v in golden.values())
    assert rep.n_unknown == 0
    assert rep.inconsistencies == []
    for pid, o in rep.outcomes.items():
        if o.verdict.status == FEASIBLE:
            assert golden[pid] == FEASIBLE
    cov = [r["coverage"] for r in rep.rounds]
    assert cov == sorted(cov)
    assert rep.coverage() == pytest.approx(1.0)


def test_campaign_stops_once_everything_is_resolved():
    ctx = corpus_context("alias")
    rep = run_campaign(ctx, cfg=CampaignConfig(schedule=(5, 10, 20, 40)))
    assert rep.n_feasible == len(ctx.pairs)
    assert len(rep.rounds) == 1


def test_hybrid_feasible_set_is_the_union_of_the_engines():
    ctx = corpus_context("countdown")
    sched = (1, 2)
    both = run_campaign(ctx, cfg=CampaignConfig(schedule=sched, cross_check=False))
    se = run_campaign(ctx, cfg=CampaignConfig(schedule=sched, engines=("se",)))
    mc = run_campaign(ctx, cfg=CampaignConfig(schedule=sched, engines=("checker",)))
    assert both.feasible_ids() == se.feasible_ids() | mc.feasible_ids()


def test_checker_is_not_rerun_after_a_verdict():
    ctx = corpus_context("power")
    rep = run_campaign(ctx, cfg=CampaignConfig(schedule=(1, 2, 4), engines=("checker",)))
    for o in rep.outcomes.values():
        assert len([a for a in o.attempts if a["engine"] == "checker"]) == 1


def test_cross_validation_attempts_are_marked():
    ctx = corpus_context("power")
    rep = run_campaign(ctx, cfg=CampaignConfig(schedule=(1, 3)))
    extra = [a for o in rep.outcomes.values() for a in o.attempts if a["round"] == "cross-check"]
    assert extra
    assert {a["engine"] for a in extra} <= {"se", "checker"}


def test_auto_bounds():
    ctx = corpus_context("countdown")
    rep = run_campaign(ctx, cfg=CampaignConfig(schedule=(1,), bounds="auto", check_timeout_ms=120_000))
    assert rep.bounds == (3, 2) and not rep.bounds_search_exhausted


def test_parallel_campaign_matches_serial():
    ctx = corpus_context("find")
    a = run_campaign(ctx, cfg=CampaignConfig(schedule=(1, 3), jobs=1))
    b = run_campaign(ctx, cfg=CampaignConfig(schedule=(1, 3), jobs=2))
    assert {k: o.verdict.status for k, o in a.outcomes.items()} == {k: o.verdict.status for k, o in b.outcomes.items()}


def test_se_alone_never_claims_bounded_results():
    ctx = corpus_context("power")
    rep = run_campaign(ctx, cfg=CampaignConfig(schedule=(1, 3), engines=("se",)))
    assert rep.n_within_bound == 0
