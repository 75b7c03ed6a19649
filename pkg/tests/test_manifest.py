import json

import pytest

from dfgen.manifest import ManifestError, corpus_dir, load_manifest
from dfgen.verdict import STATUSES


def test_bundled_manifest_is_valid():
    m = load_manifest()
    assert [e.name for e in m] == ["power", "triangle", "factorization", "find", "strmat", "tcas", "gcd", "alias",
                                   "countdown", "gauntlet"]
    for e in m:
        assert len(e.golden) == e.pairs
        assert set(e.golden.values()) <= set(STATUSES)


def test_gauntlet_has_a_quarter_infeasible():
    g = load_manifest().get("gauntlet").golden
    assert sum(v == "Infeasible" for v in g.values()) / len(g) >= 0.2


def test_directory_without_manifest(tmp_path):
    (tmp_path / "a.dfc").write_text("int f(int x) { return x; }")
    m = load_manifest(tmp_path)
    assert [e.name for e in m] == ["a"] and m.programs[0].pairs == -1


def _write(tmp_path, programs):
    (tmp_path / "power.dfc").write_text((corpus_dir() / "power.dfc").read_text())
    (tmp_path / "manifest.json").write_text(json.dumps({"version": 1, "programs": programs}))
    return tmp_path


def test_wrong_pair_count_rejected(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(_write(tmp_path, [{"path": "power.dfc", "pairs": 11}]))


def test_unknown_golden_pair_rejected(tmp_path):
    item = {"path": "power.dfc", "pairs": 15, "golden": {"verdicts": {"du99": "Feasible"}}}
    with pytest.raises(ManifestError):
        load_manifest(_write(tmp_path, [item]))


def test_missing_program_rejected(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(_write(tmp_path, [{"path": "nope.dfc", "pairs": 1}]))


def test_lookup_by_name():
    with pytest.raises(KeyError):
        load_manifest().get("nope")
