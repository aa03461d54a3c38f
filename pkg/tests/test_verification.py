import pytest

from app.models.verification import SuiteReport
from app.services import verification
from common.utils.exceptions import AcceptanceError, ParameterRangeError


DRAWS = {"dss": 3, "routing": 15}


@pytest.mark.parametrize("suite", verification.SUITES)
def test_suite_passes(suite):
    report = verification.run_suite(suite, DRAWS.get(suite, 20), seed=1)
    assert report.passed, f"{suite}: max error {report.max_error:.3e}"
    assert report.max_error < report.tolerance


def test_all_expands_to_every_suite():
    reports = verification.run_suites(["pcm", "all"], draws=1, seed=0)
    assert [r.suite for r in reports] == ["pcm", *verification.SUITES]


def test_unknown_suite():
    with pytest.raises(ParameterRangeError, match="Unknown suite"):
        verification.run_suite("teleport", 1, seed=0)


def test_draws_must_be_positive():
    with pytest.raises(ParameterRangeError):
        verification.run_suite("pcm", 0, seed=0)


def test_require_passed_raises_on_failure():
    reports = [
        SuiteReport(suite="pcm", draws=1, max_error=0.0, tolerance=1e-10, passed=True),
        SuiteReport(suite="swap", draws=1, max_error=0.5, tolerance=1e-10, passed=False),
    ]
    with pytest.raises(AcceptanceError) as excinfo:
        verification.require_passed(reports)
    assert excinfo.value.details == {"suites": ["swap"]}
    assert excinfo.value.exit_code == 2


def test_require_passed_accepts_clean_reports():
    verification.require_passed(
        [SuiteReport(suite="xz", draws=1, max_error=0.0, tolerance=1e-10, passed=True)]
    )
