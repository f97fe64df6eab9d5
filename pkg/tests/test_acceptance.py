"""Acceptance suite: one pass/fail line per criterion."""
import pytest

from capq.acceptance import CRITERIA, format_result, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA],
                         ids=[f"criterion-{c[0]}-{c[1].replace(' ', '-')}" for c in CRITERIA])
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + format_result(result))
    assert result.passed, result.detail


def test_all_criteria_present():
    assert [c[0] for c in CRITERIA] == list(range(1, 11))
