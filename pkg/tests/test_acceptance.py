"""
The acceptance gate: every criterion at its committed scale and tolerance.

Each test prints the criterion's pass/fail line; criteria 3, 7 and 8 share
one batch of tracked runs, computed once per session.
"""
import pytest

from evolsort.acceptance import CRITERIA, run_criteria

_EXPECTED_IDS = list(range(1, 13))


def test_all_criteria_present():
    assert [cid for cid, _, _ in CRITERIA] == _EXPECTED_IDS


@pytest.mark.parametrize("cid,name", [(cid, name) for cid, name, _ in CRITERIA])
def test_criterion(cid, name):
    result = run_criteria({cid})[0]
    print(result.line())
    assert result.passed, result.line()
