from fractions import Fraction

import mpmath
import numpy as np
import pytest

from mkpoly.qseries import (
    QBase,
    TruncationFailure,
    TruncationPolicy,
    q_number,
    qpoch_finite,
    qpoch_infinite,
    qpoch_infinite_array,
    theta,
    truncation_depth,
)
from mkpoly.symlaurent import LaurentPoly


def test_qpoch_finite_values():
    assert qpoch_finite(0.3, 0.5, 0) == 1
    assert qpoch_finite(0.5, 0.5, 2) == pytest.approx(0.375)
    assert qpoch_finite(Fraction(1, 2), Fraction(1, 2), 3) == Fraction(21, 64)
    assert qpoch_finite(0.5, QBase(0.5), 2) == pytest.approx(0.375)
    with pytest.raises(ValueError):
        qpoch_finite(0.5, 0.5, -1)


def test_qpoch_finite_on_laurent_polynomials():
    u = LaurentPoly.variable(1, 0)
    assert qpoch_finite(u, 0.5, 2) == LaurentPoly(1, {(0,): 1, (1,): -1.5, (2,): 0.5})


@pytest.mark.parametrize("x, q", [(0.3, 0.5), (-0.9, 0.5), (0.5, 0.9), (0.25j, 0.3)])
def test_qpoch_infinite_matches_mpmath(x, q):
    expected = complex(mpmath.qp(x, q))
    assert complex(qpoch_infinite(x, q)) == pytest.approx(expected, rel=1e-13)


def test_qpoch_infinite_zero_argument():
    assert qpoch_infinite(0, 0.5) == 1
    assert truncation_depth(0, 0.5, TruncationPolicy()) == 0


def test_qpoch_infinite_array_agrees_with_scalar():
    xs = np.array([0.1, -0.4 + 0.2j, 0.7j])
    values = qpoch_infinite_array(xs, 0.5)
    for x, value in zip(xs, values):
        assert value == pytest.approx(complex(qpoch_infinite(complex(x), 0.5)), rel=1e-13)


def test_truncation_failure_when_cap_too_small():
    with pytest.raises(TruncationFailure):
        qpoch_infinite(0.5, 0.999, TruncationPolicy(epsilon=1e-16, max_terms=10))


def test_looser_epsilon_uses_fewer_factors():
    tight = truncation_depth(0.5, 0.5, TruncationPolicy(epsilon=1e-16))
    loose = truncation_depth(0.5, 0.5, TruncationPolicy(epsilon=1e-6))
    assert loose < tight


@pytest.mark.parametrize("kwargs", [{"epsilon": 0}, {"max_terms": 0}])
def test_policy_validation(kwargs):
    with pytest.raises(ValueError):
        TruncationPolicy(**kwargs)


@pytest.mark.parametrize("q", [0, 1, 1.5, -0.5])
def test_qbase_validation(q):
    with pytest.raises(ValueError):
        QBase(q)


def test_q_numbers():
    q = 0.5
    assert q_number(0, q) == 0
    assert q_number(1, q) == pytest.approx(1)
    assert q_number(2, q) == pytest.approx(q + 1 / q)
    assert q_number(-3, q) == pytest.approx(-q_number(3, q))
    assert q_number(3, Fraction(1, 2)) == Fraction(21, 4)


def test_theta():
    q, s = 0.5, 0.7
    assert theta(0, s, q) == pytest.approx((1 / s - s) / (q - 1 / q))
    assert theta(2, s, q) == pytest.approx((1 / s - s * q ** -4) / (q - 1 / q))
    with pytest.raises(ValueError):
        theta(0, 0, q)


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("direction", [1, -1])
@pytest.mark.parametrize("sigma", np.linspace(-2, 2, 9))
def test_theta_shift_identity(sigma, direction, sign):
    q = 0.5
    s = sign * q ** (direction * sigma)
    for k in range(-3, 4):
        shifted = q ** k * theta(k, s, q)
        target = theta(0, sign * q ** (direction * sigma - k), q)
        # both sides are differences of two terms of this size
        size = q ** k * (1 / abs(s) + abs(s) * q ** (-2 * k))
        assert abs(shifted - target) < 1e-14 * max(1, size)


@pytest.mark.parametrize("sigma", np.linspace(-2, 2, 9))
def test_theta_zero_is_minus_q_number(sigma):
    q = 0.5
    assert theta(0, q ** sigma, q) == pytest.approx(-q_number(sigma, q), rel=1e-14, abs=1e-14)


@pytest.mark.parametrize("x", [0.3, -0.7, 0.95, 0.4 + 0.5j, -2.5, 10.0])
@pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
def test_qpoch_infinite_recurrence(x, q):
    left = qpoch_infinite(x, q)
    right = (1 - x) * qpoch_infinite(x * q, q)
    assert abs(left - right) <= 1e-12 * max(1, abs(left))
