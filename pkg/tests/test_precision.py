from fractions import Fraction

import mpmath
import numpy as np
import pytest

from mkpoly.precision import (
    Precision,
    as_precision,
    condition_number,
    hp_context,
    identity,
    inverse,
    max_abs,
    power,
    scalar,
    solve,
    zeros,
)


def test_as_precision():
    assert as_precision("HP") is Precision.HP
    assert as_precision(Precision.EXACT) is Precision.EXACT
    with pytest.raises(ValueError):
        as_precision("quad")


@pytest.mark.parametrize(
    "value, expected",
    [(0.5, Fraction(1, 2)), (0.1, Fraction(1, 10)), ("1/3", Fraction(1, 3)), (3, Fraction(3))],
)
def test_exact_scalars(value, expected):
    assert scalar(value, Precision.EXACT) == expected


def test_exact_rejects_complex():
    with pytest.raises(ValueError):
        scalar(1j, Precision.EXACT)


def test_power_modes():
    assert power(Fraction(1, 2), 3, Precision.EXACT) == Fraction(1, 8)
    assert power(Fraction(1, 2), -2, Precision.EXACT) == 4
    assert power(Fraction(1, 2), 2.0, Precision.EXACT) == Fraction(1, 4)
    assert power(0.5, 0.5) == pytest.approx(0.5 ** 0.5)
    assert isinstance(power(0.5, 2, Precision.HP), mpmath.mpf)
    with pytest.raises(ValueError):
        power(Fraction(1, 2), 0.5, Precision.EXACT)


def test_hp_context_sets_and_restores_precision():
    before = mpmath.mp.prec
    with hp_context(200):
        assert mpmath.mp.prec == 200
        third = scalar(1, Precision.HP) / 3
        assert abs(third * 3 - 1) < mpmath.mpf(2) ** -190
    assert mpmath.mp.prec == before
    with pytest.raises(ValueError):
        with hp_context(20):
            pass


def test_identity_and_zeros_types():
    assert identity(2).dtype == float
    exact = identity(3, Precision.EXACT)
    assert exact.dtype == object
    assert exact[1, 1] == 1 and exact[0, 1] == 0
    assert zeros((2, 2), Precision.HP)[0, 0] == 0


def test_max_abs():
    assert max_abs([Fraction(-3, 2), 1]) == Fraction(3, 2)
    assert max_abs([]) == 0
    assert max_abs(np.array([[1.0, -4.0]])) == 4.0


def test_exact_inverse():
    matrix = np.array([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]], dtype=object)
    result = inverse(matrix, Precision.EXACT)
    assert result.tolist() == [[1, -1], [-1, 2]]
    assert isinstance(result[0, 0], Fraction)


@pytest.mark.parametrize("mode", [Precision.F64, Precision.HP, Precision.EXACT])
def test_solve_all_modes(mode):
    matrix = np.array([[4, 1], [1, 3]], dtype=float if mode is Precision.F64 else object)
    if mode is Precision.EXACT:
        matrix = np.vectorize(Fraction, otypes=[object])(matrix)
    solution = solve(matrix, np.array([1, 2]), mode)
    assert float(solution[0]) == pytest.approx(1 / 11)
    assert float(solution[1]) == pytest.approx(7 / 11)
    if mode is Precision.EXACT:
        assert solution[1] == Fraction(7, 11)


def test_condition_number():
    assert condition_number(np.eye(3)) == pytest.approx(1)
    exact = np.array([[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1, 100)]], dtype=object)
    assert condition_number(exact) == pytest.approx(100)
    assert condition_number(np.zeros((0, 0))) == 1.0


@pytest.mark.parametrize("mode", [Precision.HP, Precision.EXACT])
def test_condition_number_multiprecision(mode):
    diagonal = np.array([[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1, 100)]], dtype=object)
    assert float(condition_number(diagonal, mode)) == pytest.approx(100)
    singular = np.array([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]], dtype=object)
    assert condition_number(singular, Precision.EXACT) == mpmath.inf
    assert float(condition_number(np.eye(3), mode)) == pytest.approx(1)
