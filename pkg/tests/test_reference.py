import logging

import pytest

from src.exceptions import InvalidInputError
from src.models import AttractorClass, Convention, CountMethod, GridAxis, GridSpec, SweepTask, SystemParams
from src.pipeline import ReferenceCheck, run_reference_checks
from src.pipeline.reference import (
    check_stability_rows,
    check_two_state_threshold,
    chain_verdict,
)


@pytest.mark.parametrize("convention", list(Convention))
def test_lowest_stability_row_is_not_reproduced(convention, caplog):
    with caplog.at_level(logging.WARNING, logger="src.pipeline.reference"):
        checks = check_stability_rows(convention)

    assert [c.name for c in checks] == [
        "stability row jm=0.02 delta=-2",
        "stability row jm=0.07 delta=-1",
        "stability row jm=0.08 delta=0",
    ]
    first = checks[0]
    assert first.expected == "stable"
    assert first.observed["n_fixed_points"] == 1
    assert first.observed["stable"] is False
    assert not first.reproduced
    assert f"stability row jm=0.02 delta=-2 [{convention.value}] not reproduced" in caplog.text

    for check in checks:
        assert check.reproduced == (check.observed["stable"] is (check.expected == "stable"))


def test_threshold_check_on_a_small_window():
    grid = GridSpec(
        x=GridAxis(name="delta", min=-3.0, max=3.0, n=5),
        y=GridAxis(name="jm", min=0.0, max=0.1, n=3),
        base=SystemParams(),
        task=SweepTask.COUNT,
        count_method=CountMethod.CLOSED_FORM,
    )
    (check,) = check_two_state_threshold(Convention.REDERIVED, grid=grid)
    lo, hi = check.observed["fraction_lo"], check.observed["fraction_hi"]
    assert 0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0
    assert check.observed["count_method"] == CountMethod.CLOSED_FORM
    assert check.reproduced == (lo > 0.0 and hi == 0.0)


@pytest.mark.parametrize("onsets, expected", [
    ({AttractorClass.FIXED_POINT: 500.0, AttractorClass.QUASI_PERIODIC: 800.0, AttractorClass.CHAOTIC: 1100.0}, True),
    ({AttractorClass.FIXED_POINT: 500.0, AttractorClass.PERIODIC: 600.0, AttractorClass.CHAOTIC: 1300.0}, True),
    ({AttractorClass.FIXED_POINT: 500.0, AttractorClass.PERIODIC: 1000.0, AttractorClass.CHAOTIC: 900.0}, False),
    ({AttractorClass.FIXED_POINT: 500.0, AttractorClass.QUASI_PERIODIC: 800.0, AttractorClass.CHAOTIC: 1500.0}, False),
    ({AttractorClass.FIXED_POINT: 500.0, AttractorClass.QUASI_PERIODIC: 800.0}, False),
    ({AttractorClass.DIVERGED: 500.0}, False),
])
def test_chain_verdict(onsets, expected):
    assert chain_verdict(onsets)[0] is expected


def test_chain_verdict_reports_missing_regimes():
    verdict, still, moving, chaos = chain_verdict({AttractorClass.PERIODIC: 700.0, AttractorClass.QUASI_PERIODIC: 600.0})
    assert not verdict
    assert still is None and moving == 600.0 and chaos is None


def test_diagnostic_text():
    check = ReferenceCheck(
        name="x", convention="paper", expected="e", reproduced=False,
        observed={"a": 0.1234567891, "b": None, "c": AttractorClass.CHAOTIC, "d": True, "e": 3},
    )
    assert check.diagnostic == "a=0.123457; b=none; c=chaotic; d=True; e=3"


def test_run_selects_checks_and_conventions():
    checks = run_reference_checks(["rows"], [Convention.REDERIVED])
    assert len(checks) == 3
    assert {c.convention for c in checks} == {Convention.REDERIVED}
    with pytest.raises(InvalidInputError):
        run_reference_checks(["nope"])
