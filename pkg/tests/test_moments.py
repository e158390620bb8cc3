import numpy as np
import pytest

from mkpoly.koornwinder import mk_polynomial
from mkpoly.moments import AskeyWilsonMoments, DegenerateMoments
from mkpoly.symlaurent import LaurentPoly, RankMismatchError, orbit_sum
from mkpoly.torus_measure import MKParams, QuadratureGrid, TorusMeasure

INSIDE = MKParams(0.3, -0.2, 0.5, -0.4, 0.6, 0.5)
OUTSIDE = MKParams(0.3, -2.0, 0.5, -0.4, 0.6, 0.5)


def first_moment(a, b, c, d):
    return (a + b + c + d - a * b * c - a * b * d - a * c * d - b * c * d) / (1 - a * b * c * d)


def test_normalised():
    assert AskeyWilsonMoments(INSIDE).expectation(LaurentPoly.constant(1)) == pytest.approx(1)
    assert AskeyWilsonMoments(INSIDE).expectation(LaurentPoly.zero(1)) == 0


@pytest.mark.parametrize("params", [INSIDE, OUTSIDE])
def test_first_moment_closed_form(params):
    value = AskeyWilsonMoments(params).expectation(orbit_sum((1,)))
    assert value.real == pytest.approx(first_moment(*params.couplings), rel=1e-13)


def test_anchor_is_largest_coupling():
    moments = AskeyWilsonMoments(OUTSIDE)
    assert moments.anchor == -2.0
    assert sorted(moments.others) == sorted([0.3, 0.5, -0.4])


def test_agrees_with_torus_inside_the_regime():
    torus = TorusMeasure(INSIDE, QuadratureGrid(128))
    moments = AskeyWilsonMoments(INSIDE)
    basis = [orbit_sum((k,)) for k in range(5)]
    assert np.allclose(moments.gram(basis), torus.gram(basis), atol=1e-11)


def test_polynomials_agree_with_torus():
    from_torus = mk_polynomial((3,), INSIDE, grid=QuadratureGrid(128))
    from_moments = mk_polynomial((3,), INSIDE, measure=AskeyWilsonMoments(INSIDE))
    assert from_torus.poly.max_abs_difference(from_moments.poly) < 1e-10


def test_outside_the_regime_still_orthogonal():
    moments = AskeyWilsonMoments(OUTSIDE)
    polys = [mk_polynomial((k,), OUTSIDE, measure=moments).poly for k in range(4)]
    norms = [abs(moments.pairing(p, p)) for p in polys]
    for i in range(4):
        for j in range(i):
            assert abs(moments.pairing(polys[i], polys[j])) < 1e-9 * (norms[i] * norms[j]) ** 0.5


def test_rejects_bad_input():
    moments = AskeyWilsonMoments(INSIDE)
    with pytest.raises(ValueError):
        moments.expectation(LaurentPoly.variable(1, 0))
    with pytest.raises(ValueError):
        moments.expectation(orbit_sum((1,)), raw=True)
    with pytest.raises(RankMismatchError):
        moments.expectation(orbit_sum((1, 0)))


def test_all_couplings_zero_is_degenerate():
    with pytest.raises(DegenerateMoments):
        AskeyWilsonMoments(MKParams(0, 0, 0, 0, 0.5, 0.5))


def test_vanishing_denominator():
    # abcd = 1/q kills (abcd; q)_2
    params = MKParams(4.0, 1.0, 1.0, 1.0, 0.5, 0.25)
    with pytest.raises(DegenerateMoments):
        AskeyWilsonMoments(params).expectation(orbit_sum((2,)))
