import logging

import mpmath
import numpy as np
import pytest

from mkpoly.symlaurent import LaurentPoly, RankMismatchError, orbit_sum
from mkpoly.torus_measure import (
    DivergentFactor,
    MKParams,
    NoConvergence,
    NonRealResult,
    ParameterRegimeError,
    QuadratureGrid,
    TorusMeasure,
    auto_grid,
    delta_eval,
    delta_plus_eval,
    haar_pairing,
    orbit_sum_gram,
    validate_params,
)

PARAMS = MKParams(0.3, -0.2, 0.5, -0.4, 0.6, 0.5)


def askey_wilson_mass(a, b, c, d, q):
    """Mean of the rank-one weight over the unit circle."""
    pairs = [a * b, a * c, a * d, b * c, b * d, c * d]
    denominator = mpmath.qp(q, q)
    for value in pairs:
        denominator *= mpmath.qp(value, q)
    return float(2 * mpmath.qp(a * b * c * d, q) / denominator)


def first_moment(a, b, c, d):
    """h(u + 1/u) for the normalised rank-one weight."""
    return (a + b + c + d - a * b * c - a * b * d - a * c * d - b * c * d) / (1 - a * b * c * d)


def test_validate_params():
    assert validate_params(PARAMS)
    assert not validate_params(MKParams(1.2, 0, 0, 0, 0.5, 0.5))
    assert not validate_params(MKParams(0.1, 0, 0, 0, 1.0, 0.5))
    assert not validate_params(MKParams(0.1j, 0, 0, 0, 0.5, 0.5))
    with pytest.raises(ValueError):
        MKParams(0.1, 0, 0, 0, 0.5, 1.0)


def test_grid_shapes():
    grid = QuadratureGrid(8, 2)
    assert grid.size == 64
    assert grid.angles().shape == (64, 2)
    assert np.allclose(np.abs(grid.points()), 1)
    with pytest.raises(ValueError):
        QuadratureGrid(3)


def test_delta_is_real_and_vanishes_at_one():
    assert delta_eval([1j], PARAMS) > 0
    assert delta_eval([1.0], PARAMS) == 0
    value = delta_eval([np.exp(0.4j), np.exp(-1.1j)], PARAMS)
    assert value > 0


def test_delta_plus_rejects_points_off_the_circle():
    with pytest.raises(ValueError):
        delta_plus_eval([2.0], PARAMS)


def test_vectorised_weight_matches_pointwise():
    measure = TorusMeasure(PARAMS, QuadratureGrid(6, 2))
    for angles, weight in zip(measure.angles[:10], measure.weights[:10]):
        assert weight == pytest.approx(delta_eval(list(np.exp(1j * angles)), PARAMS), rel=1e-10, abs=1e-12)


def test_normalizer_matches_askey_wilson_mass():
    a, b, c, d = PARAMS.couplings
    measure = TorusMeasure(PARAMS, QuadratureGrid(128))
    assert measure.normalizer == pytest.approx(askey_wilson_mass(a, b, c, d, PARAMS.q), rel=1e-12)


def test_zero_couplings_mass():
    params = MKParams(0, 0, 0, 0, 0.5, 0.5)
    measure = TorusMeasure(params, QuadratureGrid(64))
    assert measure.normalizer == pytest.approx(2 / float(mpmath.qp(0.5, 0.5)), rel=1e-12)


def test_expectation_first_moment():
    measure = TorusMeasure(PARAMS, QuadratureGrid(128))
    assert measure.expectation(LaurentPoly.constant(1)) == pytest.approx(1)
    expected = first_moment(*PARAMS.couplings)
    assert measure.expectation(orbit_sum((1,))).real == pytest.approx(expected, abs=1e-12)


def test_pairing_is_hermitian():
    measure = TorusMeasure(PARAMS, QuadratureGrid(64))
    p = orbit_sum((2,)) + LaurentPoly.monomial((1,), 0.3j)
    r = orbit_sum((1,)) - 0.5
    assert measure.pairing(p, r) == pytest.approx(np.conj(measure.pairing(r, p)), abs=1e-13)


def test_gram_deterministic_and_vectorised_agree():
    basis = [orbit_sum(lam) for lam in [(0, 0), (1, 0), (1, 1), (2, 0)]]
    exact = TorusMeasure(PARAMS, QuadratureGrid(32, 2)).gram(basis)
    fast = TorusMeasure(PARAMS, QuadratureGrid(32, 2), deterministic=False).gram(basis)
    assert np.allclose(exact, fast, atol=1e-13)
    assert np.allclose(exact, exact.conj().T)
    assert np.all(np.linalg.eigvalsh(exact) > 0)


def test_haar_pairing_normalised():
    one = LaurentPoly.constant(1)
    assert haar_pairing(one, one, PARAMS, QuadratureGrid(32)) == pytest.approx(1)
    with pytest.raises(RankMismatchError):
        haar_pairing(one, one, PARAMS, QuadratureGrid(32, 2))


def test_expectation_rank_mismatch():
    with pytest.raises(RankMismatchError):
        TorusMeasure(PARAMS, QuadratureGrid(16, 2)).expectation(orbit_sum((1,)))


def test_parameter_regime_errors():
    with pytest.raises(ParameterRegimeError):
        TorusMeasure(MKParams(1.5, 0, 0, 0, 0.5, 0.5), QuadratureGrid(16))


def test_divergent_factor_on_the_grid():
    measure = TorusMeasure(MKParams(1.0, 0, 0, 0, 0.5, 0.5), QuadratureGrid(16), strict=False)
    with pytest.raises(DivergentFactor):
        measure.weights


def test_non_real_weight():
    measure = TorusMeasure(MKParams(0.5j, 0, 0, 0, 0.5, 0.5), QuadratureGrid(16), strict=False)
    with pytest.raises(NonRealResult):
        measure.weights


def test_auto_grid_doubles_until_stable():
    grid = auto_grid(8, MKParams(0.3, -0.2, 0.5, -0.4, 0.6, 0.5))
    assert grid.points_per_circle == 128
    assert grid.rank == 1


def test_auto_grid_gives_up():
    with pytest.raises(NoConvergence):
        auto_grid(4, PARAMS, max_doublings=0)
    with pytest.raises(ValueError):
        auto_grid(-1, PARAMS)


def test_auto_grid_logs_refinements(caplog):
    with caplog.at_level(logging.INFO, logger="mkpoly.torus_measure"):
        auto_grid(2, PARAMS)
    assert any("auto_grid" in record.getMessage() for record in caplog.records)


def test_orbit_sum_gram_size():
    gram = orbit_sum_gram(TorusMeasure(PARAMS, QuadratureGrid(64)), 1, 3)
    assert gram.shape == (4, 4)
    assert gram[0, 0] == pytest.approx(1)


def test_parallel_failure_falls_back_to_serial(monkeypatch, caplog):
    def broken_pool(*args, **kwargs):
        raise OSError("no processes here")

    monkeypatch.setattr("mkpoly.torus_measure.multiprocessing.Pool", broken_pool)
    measure = TorusMeasure(PARAMS, QuadratureGrid(16), max_workers=2)
    measure.PARALLEL_MIN_POINTS = 1
    with caplog.at_level(logging.WARNING):
        weights = measure.weights
    serial = TorusMeasure(PARAMS, QuadratureGrid(16)).weights
    assert np.array_equal(weights, serial)
    assert "falling back to serial" in caplog.text


def test_vectorised_sums_return_scalars():
    deterministic = TorusMeasure(PARAMS, QuadratureGrid(64))
    fast = TorusMeasure(PARAMS, QuadratureGrid(64), deterministic=False)
    assert isinstance(fast.normalizer, float)
    assert fast.normalizer == pytest.approx(deterministic.normalizer, rel=1e-13)
    p = orbit_sum((2,)) + LaurentPoly.monomial((1,), 0.3j)
    assert fast.expectation(p) == pytest.approx(deterministic.expectation(p), abs=1e-13)
    assert fast.pairing(p, p).real > 0


@pytest.mark.parametrize("rank, points", [(1, 64), (2, 24)])
def test_pairing_is_positive(rank, points):
    measure = TorusMeasure(PARAMS, QuadratureGrid(points, rank))
    rng = np.random.default_rng(7 + rank)
    for _ in range(20):
        terms = {
            tuple(int(e) for e in rng.integers(-3, 4, size=rank)): complex(*rng.normal(size=2))
            for _ in range(4)
        }
        p = LaurentPoly(rank, terms)
        norm = measure.pairing(p, p)
        assert abs(norm.imag) < 1e-12 * abs(norm)
        assert norm.real > 0
