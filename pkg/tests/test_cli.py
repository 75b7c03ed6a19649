import io
import json
import re
import shlex
from pathlib import Path

import pytest

from dfgen.cli import main

ROOT = Path(__file__).resolve().parent.parent
POWER = "src/dfgen/corpus/power.dfc"


def call(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


@pytest.fixture(autouse=True)
def _root(monkeypatch):
    monkeypatch.chdir(ROOT)
    monkeypatch.delenv("DFGEN_SEED", raising=False)


@pytest.mark.parametrize("argv, code", [
    ([], 2),
    (["hybrid", POWER, "--schedule", "1,x"], 2),
    (["se", POWER, "--pair", "du8", "--strategy", "nope"], 2),
    (["check", POWER, "--pair", "du8", "--unwind", "-1"], 2),
    (["se", POWER, "--pair", "du999"], 1),
    (["pairs", "no/such/file.dfc"], 1),
])
def test_exit_codes(argv, code):
    assert call(argv)[0] == code


def test_bad_seed_environment_is_a_usage_error(monkeypatch):
    monkeypatch.setenv("DFGEN_SEED", "abc")
    assert call(["se", POWER, "--pair", "du8"])[0] == 2


def test_pairs_json():
    code, text = call(["pairs", POWER])
    assert code == 0
    pairs = json.loads(text)
    assert len(pairs) == 15
    ids = [p["id"] for p in pairs]
    assert ids == [f"du{i}" for i in range(1, 16)]


def test_run_reports_covered_pairs():
    code, text = call(["run", POWER, "--input", "x=2,y=10"])
    data = json.loads(text)
    assert code == 0 and data["status"] == "return" and data["value"] == 1024
    assert data["covered"]


def test_seed_from_environment_is_deterministic(monkeypatch):
    argv = ["se", POWER, "--pair", "du8", "--strategy", "rss", "--log"]
    monkeypatch.setenv("DFGEN_SEED", "7")
    a = call(argv)[1]
    b = call(argv)[1]
    c = call(argv + ["--seed", "7"])[1]
    drop = lambda t: {k: v for k, v in json.loads(t).items() if k != "time_ms"}
    assert drop(a) == drop(b) == drop(c)


def test_check_proves_du9_infeasible_within_bound():
    code, text = call(["check", POWER, "--pair", "du9", "--unwind", "2"])
    assert code == 0 and json.loads(text)["verdict"] == "InfeasibleWithinBound"


def _readme_commands():
    text = (ROOT / "README.md").read_text()
    return [m.group(1) for m in re.finditer(r"^\$ dfgen (.+)$", text, re.M)]


def test_readme_lists_commands():
    assert len(_readme_commands()) >= 7


@pytest.mark.parametrize("line", _readme_commands())
def test_readme_commands_run(line):
    code, text = call(shlex.split(line))
    assert code == 0 and text
