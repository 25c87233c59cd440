"""The fifteen acceptance criteria, judged from `verify-all --seed 7` run through the CLI.

Criteria 1-14 read their verdicts from the first run's JSON report; criterion 15
compares the bytes of two independent runs.  Each test prints one PASS/FAIL line,
and the same lines are repeated in the terminal summary.
"""
import json

import pytest

from conftest import ACCEPTANCE_LINES
from superosc.cli import run_captured
from superosc.verify import CHECKS

SEED = "7"


@pytest.fixture(scope="module")
def reports():
    first = run_captured(["verify-all", "--seed", SEED])
    second = run_captured(["verify-all", "--seed", SEED])
    return first, second


@pytest.fixture(scope="module")
def verdicts(reports):
    code, out, err = reports[0]
    assert code in (0, 2), err
    return {c["id"]: c for c in json.loads(out)["checks"]}


def _record(i: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {i:2d} [{name}]: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    ACCEPTANCE_LINES[i] = line
    print(line)


@pytest.mark.parametrize("i", [i for i in CHECKS if i != 15])
def test_criterion(i, verdicts):
    c = verdicts[i]
    _record(i, c["name"], c["passed"], json.dumps(c["details"], sort_keys=True))
    assert c["passed"], c["details"]


def test_criterion_15_determinism(reports, verdicts):
    (c1, o1, _), (c2, o2, _) = reports
    same = c1 == c2 and o1.encode() == o2.encode()
    _record(15, "determinism", same and verdicts[15]["passed"],
            f"{len(o1.encode())} bytes per report")
    assert same
    assert verdicts[15]["passed"], verdicts[15]["details"]
