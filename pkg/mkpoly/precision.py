"""
Numeric modes shared by the polynomial and quantum-group pipelines.

Three scalar types are supported: machine floats (``f64``), mpmath
multiprecision floats (``hp``) and exact rationals (``exact``, library only).
Matrices in the ``hp`` and ``exact`` modes are numpy object arrays holding
mpmath or ``fractions.Fraction`` entries.
"""
from contextlib import contextmanager
from enum import Enum
from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Iterator, Union

import mpmath
import numpy as np
import sympy

Scalar = Union[int, float, complex, Fraction, "mpmath.mpf", "mpmath.mpc"]

DEFAULT_HP_BITS = 128


class Precision(str, Enum):
    F64 = "f64"
    HP = "hp"
    EXACT = "exact"


def as_precision(value: Union[str, Precision]) -> Precision:
    if isinstance(value, Precision):
        return value
    try:
        return Precision(str(value).lower())
    except ValueError:
        raise ValueError(f"unknown precision mode: {value!r}") from None


@contextmanager
def hp_context(bits: int = DEFAULT_HP_BITS) -> Iterator[None]:
    """Temporarily set the mpmath working precision (mantissa bits)."""
    if bits < 53:
        raise ValueError("high precision needs at least 53 mantissa bits")
    with mpmath.workprec(bits):
        yield


def scalar(value, mode: Precision = Precision.F64):
    """Coerce ``value`` into the scalar type used by ``mode``."""
    mode = as_precision(mode)
    if mode is Precision.EXACT:
        if isinstance(value, Rational):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, float):
            # Only floats that are exact short decimals make sense here.
            return Fraction(str(value))
        raise ValueError(f"exact mode needs a rational value, got {value!r}")
    if mode is Precision.HP:
        if isinstance(value, Fraction):
            return mpmath.mpf(value.numerator) / value.denominator
        if isinstance(value, complex) or isinstance(value, mpmath.mpc):
            return mpmath.mpc(value)
        return mpmath.mpf(value)
    if isinstance(value, (complex, mpmath.mpc)):
        return complex(value)
    return float(value)


def power(base, exponent, mode: Precision = Precision.F64):
    """``base ** exponent`` in the scalar type of ``mode``.

    Exact mode accepts integer exponents only; the result is then a Fraction.
    """
    mode = as_precision(mode)
    if mode is Precision.EXACT:
        if isinstance(exponent, Fraction) and exponent.denominator == 1:
            exponent = int(exponent)
        if isinstance(exponent, float) and exponent.is_integer():
            exponent = int(exponent)
        if not isinstance(exponent, Integral):
            raise ValueError(f"exact mode needs an integer exponent, got {exponent!r}")
        return scalar(base, mode) ** int(exponent)
    if isinstance(exponent, Integral):
        return scalar(base, mode) ** int(exponent)
    return scalar(base, mode) ** scalar(exponent, mode)


def zero_like(mode: Precision):
    return scalar(0, mode)


def identity(dim: int, mode: Precision = Precision.F64) -> np.ndarray:
    if as_precision(mode) is Precision.F64:
        return np.eye(dim)
    out = zeros((dim, dim), mode)
    for k in range(dim):
        out[k, k] = scalar(1, mode)
    return out


def zeros(shape, mode: Precision = Precision.F64) -> np.ndarray:
    if as_precision(mode) is Precision.F64:
        return np.zeros(shape)
    return np.full(shape, zero_like(mode), dtype=object)


def max_abs(values: Iterable) -> Scalar:
    """Largest modulus of ``values``; exact for Fraction entries, 0 when empty."""
    best = 0
    for value in np.asarray(values, dtype=object).ravel():
        size = abs(value)
        if size > best:
            best = size
    return best


def _to_mp_matrix(matrix: np.ndarray) -> "mpmath.matrix":
    rows, cols = matrix.shape
    out = mpmath.matrix(rows, cols)
    for i in range(rows):
        for j in range(cols):
            value = matrix[i, j]
            out[i, j] = scalar(value, Precision.HP) if isinstance(value, Fraction) else value
    return out


def _from_mp_matrix(matrix: "mpmath.matrix") -> np.ndarray:
    out = np.empty((matrix.rows, matrix.cols), dtype=object)
    for i in range(matrix.rows):
        for j in range(matrix.cols):
            out[i, j] = matrix[i, j]
    return out


def _to_sympy_matrix(matrix: np.ndarray) -> sympy.Matrix:
    rows, cols = matrix.shape
    return sympy.Matrix(
        rows, cols,
        lambda i, j: sympy.Rational(Fraction(matrix[i, j]).numerator, Fraction(matrix[i, j]).denominator),
    )


def _from_sympy_matrix(matrix: sympy.Matrix) -> np.ndarray:
    out = np.empty(matrix.shape, dtype=object)
    for i in range(matrix.rows):
        for j in range(matrix.cols):
            entry = sympy.Rational(matrix[i, j])
            out[i, j] = Fraction(int(entry.p), int(entry.q))
    return out


def inverse(matrix: np.ndarray, mode: Precision = Precision.F64) -> np.ndarray:
    mode = as_precision(mode)
    if mode is Precision.F64:
        return np.linalg.inv(matrix)
    if mode is Precision.HP:
        return _from_mp_matrix(mpmath.inverse(_to_mp_matrix(matrix)))
    return _from_sympy_matrix(_to_sympy_matrix(matrix).inv())


def solve(matrix: np.ndarray, rhs: np.ndarray, mode: Precision = Precision.F64) -> np.ndarray:
    """Solve ``matrix @ x = rhs`` for a single right-hand side vector."""
    mode = as_precision(mode)
    rhs = np.asarray(rhs)
    if mode is Precision.F64:
        return np.linalg.solve(matrix, rhs)
    column = rhs.reshape(-1, 1).astype(object)
    if mode is Precision.HP:
        solution = mpmath.lu_solve(_to_mp_matrix(matrix), _to_mp_matrix(column))
        return _from_mp_matrix(solution).ravel()
    solution = _to_sympy_matrix(matrix).LUsolve(_to_sympy_matrix(column))
    return _from_sympy_matrix(solution).ravel()


def condition_number(matrix: np.ndarray, mode: Precision = Precision.F64):
    """2-norm condition number; singular values from numpy (f64) or mpmath (hp, exact).

    Exact mode first decides singularity by the sympy rank, then measures the
    condition at the current mpmath precision. Singular matrices give inf.
    """
    mode = as_precision(mode)
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 1.0
    if mode is Precision.F64:
        dense = np.array([[complex(v) for v in row] for row in matrix.tolist()], dtype=complex)
        return float(np.linalg.cond(dense))
    if mode is Precision.EXACT and _to_sympy_matrix(matrix).rank() < min(matrix.shape):
        return mpmath.inf
    values = mpmath.svd(_to_mp_matrix(matrix), compute_uv=False)
    sizes = [abs(values[i]) for i in range(values.rows)]
    if min(sizes) == 0:
        return mpmath.inf
    return max(sizes) / min(sizes)
