import pytest

from mkpoly.koornwinder import SphericalLabels
from mkpoly.main import (
    run_aw_verify,
    run_compute,
    run_gram,
    run_groundstate,
    run_rosengren,
    run_spectrum,
)
from mkpoly.precision import Precision, hp_context
from mkpoly.torus_measure import MKParams

PARAMS = MKParams(0.3, -0.2, 0.5, -0.4, 0.6, 0.5)


def test_run_compute_trivial_label():
    run = run_compute(1, (0,), PARAMS)
    assert run.passed
    assert run.result["orbit_coefficients"] == {}
    assert run.result["polynomial"].terms == (((0,), 1),)
    assert "P_[0]" in run.summary


def test_run_compute_rejects_wrong_length():
    with pytest.raises(ValueError):
        run_compute(2, (1,), PARAMS)


def test_run_compute_rank_two():
    run = run_compute(2, (1, 1), PARAMS, grid_points=32)
    assert run.passed
    assert set(run.result["orbit_coefficients"]) == {"0,0", "1,0"}
    assert run.result["grid"] == 32


def test_run_gram_rank_one():
    run = run_gram(1, 4, PARAMS)
    assert run.passed
    assert len(run.result["labels"]) == 5
    assert run.result["max_offdiag"] < 1e-10
    assert run.result["incomparable_pairs"] == []


def test_run_gram_threshold_decides():
    assert not run_gram(1, 2, PARAMS, grid_points=32, threshold=-1).passed


def test_run_groundstate_rank_one():
    run = run_groundstate(SphericalLabels(1, 1, 0, 0, 0.2, 0.3, 0.5))
    assert run.passed
    assert run.result["delta"] == [1]
    assert run.result["restriction_residual"] < 1e-11


def test_run_groundstate_rank_two_has_no_restriction_check():
    run = run_groundstate(SphericalLabels(2, 1, 0, 1, 0.2, 0.3, 0.5))
    assert run.passed
    assert run.result["delta"] == [2, 1]
    assert "restriction_residual" not in run.result


def test_run_aw_verify_mixed_signs():
    labels = SphericalLabels(1, 2, -1, 0, 0.3, 0.7, 0.5)
    run = run_aw_verify(labels, 4)
    assert run.passed
    assert [row["mu"] for row in run.result["per_mu"]] == [0, 1, 2, 3, 4]
    assert all(row["route"] == "moments" for row in run.result["per_mu"])
    assert run.result["theta_consistency"] < 1e-12


def test_run_aw_verify_rank_one_only():
    with pytest.raises(ValueError):
        run_aw_verify(SphericalLabels(2, 1, 0, 0, 0.3, 0.2, 0.5), 1)


def test_run_rosengren():
    run = run_rosengren(2, 0.7, 0.5)
    assert run.passed
    assert set(run.result["relations"]) >= {"xy - yx"}
    assert run.result["intertwining_residual"] < 1e-11


def test_run_spectrum():
    run = run_spectrum(5, 0.3, 0.5)
    assert run.passed
    assert run.result["simple"]
    assert run.result["branching"]["6"] == 0
    assert run.result["branching"]["-5"] == 1
    assert len(run.result["table"]) == 11


def test_run_spectrum_high_precision():
    with hp_context(128):
        run = run_spectrum(8, 0.3, 0.5, precision=Precision.HP)
    assert run.passed
    assert run.result["branching"]["8"] == 1
    assert "worst absolute error" in run.summary


def test_run_rosengren_double_at_the_largest_module():
    run = run_rosengren(6, 0.7, 0.5)
    assert run.passed
    assert run.result["conjugation_residual"] < 1e-11
