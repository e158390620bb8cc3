"""
Rank-one quantum symmetric pair as explicit matrices.

The module L_(m,-m) of U_q(gl(2)) has basis e_0..e_2m, where e_k has weight
(m-k, k-m):

    x e_k = [k] e_{k-1},   y e_k = [2m-k] e_{k+1},
    K1 e_k = q^(m-k) e_k,  K2 e_k = q^(k-m) e_k.

On top of it this module builds the coideal generator B^sigma, its Cartan
form Bhat^sigma, the conjugating element x_sigma, B-eigenvectors and the
torus restrictions of the spherical functions they define. Every matrix is
stored in the scalar type of the chosen precision mode.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import mpmath
import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal, solve_banded

from .koornwinder import SphericalLabels, mk_polynomial, spherical_parameter_map
from .moments import AskeyWilsonMoments
from .precision import (
    DEFAULT_HP_BITS,
    Precision,
    as_precision,
    hp_context,
    identity,
    inverse,
    max_abs,
    power,
    scalar,
    zeros,
)
from .qseries import TruncationPolicy, q_number, qpoch_finite, theta
from .symlaurent import LaurentPoly, is_w_invariant, projective_residual
from .torus_measure import QuadratureGrid, TorusMeasure, auto_grid, validate_params

logger = logging.getLogger(__name__)

RELATION_TOL = 1e-12
EIGENVALUE_MATCH_TOL = 1e-10
EIGENVALUE_SEARCH_TOL = 1e-8
ZERO_FUNCTION_TOL = 1e-13


class RelationViolation(AssertionError):
    """A defining relation of U_q(gl(2)) fails on the constructed matrices."""


class SingularConjugator(ArithmeticError):
    pass


class EigenvalueNotFound(ArithmeticError):
    pass


class ZeroFunction(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class UqGl2Module:
    m: int
    q: object
    x: np.ndarray
    y: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    K1inv: np.ndarray
    K2inv: np.ndarray
    gram: np.ndarray
    precision: Precision = Precision.F64

    @property
    def dim(self) -> int:
        return 2 * self.m + 1

    def weight(self, k: int) -> tuple:
        return (self.m - k, k - self.m)


@dataclass(frozen=True, eq=False)
class CoidealOperator:
    matrix: np.ndarray
    sigma: object
    kind: str


@dataclass(frozen=True)
class RestrictedSpherical:
    mu: int
    labels: SphericalLabels
    poly: LaurentPoly


@dataclass(frozen=True)
class RankOneCheck:
    mu: int
    route: str
    scale: complex
    residual: float
    grid_points: Optional[int] = None


def _relation_tol(mode: Precision):
    if mode is Precision.EXACT:
        return 0
    if mode is Precision.HP:
        return mpmath.mpf(2) ** (-(mpmath.mp.prec // 2))
    return RELATION_TOL


def _diag(values, mode: Precision) -> np.ndarray:
    out = zeros((len(values), len(values)), mode)
    for k, value in enumerate(values):
        out[k, k] = value
    return out


def _relative(difference: np.ndarray, *scales: np.ndarray):
    size = max_abs(difference)
    reference = max([1] + [max_abs(s) for s in scales])
    return size / reference


def build_module(m: int, q, precision: Precision = Precision.F64, check: bool = True) -> UqGl2Module:
    """Matrix model of L_(m,-m) with its unitarising Gram diagonal."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    mode = as_precision(precision)
    q = scalar(q, mode)
    dim = 2 * m + 1
    x = zeros((dim, dim), mode)
    y = zeros((dim, dim), mode)
    for k in range(1, dim):
        x[k - 1, k] = q_number(k, q)
    for k in range(dim - 1):
        y[k + 1, k] = q_number(2 * m - k, q)
    K1 = _diag([power(q, m - k, mode) for k in range(dim)], mode)
    K2 = _diag([power(q, k - m, mode) for k in range(dim)], mode)
    K1inv = _diag([power(q, k - m, mode) for k in range(dim)], mode)
    K2inv = _diag([power(q, m - k, mode) for k in range(dim)], mode)
    gram = [scalar(1, mode)]
    for k in range(1, dim):
        # adjointness of x: <x e_k, e_{k-1}> = <e_k, x* e_{k-1}>
        step = q_number(k, q) / (power(q, 2 * m - 2 * k + 1, mode) * q_number(2 * m - k + 1, q))
        gram.append(gram[-1] * step)
    gram = np.array(gram, dtype=float if mode is Precision.F64 else object)
    module = UqGl2Module(m, q, x, y, K1, K2, K1inv, K2inv, gram, mode)
    if check:
        failures = {name: value for name, value in relation_residuals(module).items()
                    if value > _relation_tol(mode)}
        if failures:
            raise RelationViolation(f"relations fail on L_({m},{-m}): {failures}")
    return module


def relation_residuals(module: UqGl2Module) -> Dict[str, object]:
    """Relative residual of each defining relation of U_q(gl(2)) on the module."""
    q = module.q
    x, y, K1, K2, K1inv, K2inv = module.x, module.y, module.K1, module.K2, module.K1inv, module.K2inv
    one = identity(module.dim, module.precision)
    commutator = (K1 @ K2inv - K1inv @ K2) / (q - 1 / q)
    return {
        "K1 K1^-1 = 1": _relative(K1 @ K1inv - one, one),
        "K2 K2^-1 = 1": _relative(K2 @ K2inv - one, one),
        "K1 K2 = K2 K1": _relative(K1 @ K2 - K2 @ K1, K1 @ K2),
        "K1 x K1^-1 = q x": _relative(K1 @ x @ K1inv - x * q, x),
        "K2 x K2^-1 = q^-1 x": _relative(K2 @ x @ K2inv - x / q, x),
        "K1 y K1^-1 = q^-1 y": _relative(K1 @ y @ K1inv - y / q, y),
        "K2 y K2^-1 = q y": _relative(K2 @ y @ K2inv - y * q, y),
        "xy - yx": _relative(x @ y - y @ x - commutator, x @ y, commutator),
    }


def _adjoint(matrix: np.ndarray, gram: np.ndarray, mode: Precision) -> np.ndarray:
    """Matrix of the adjoint for <v, w> = sum_k gram_k v_k conj(w_k)."""
    g = _diag(list(gram), mode)
    g_inv = _diag([1 / value for value in gram], mode)
    return g_inv @ np.conj(matrix.T) @ g


def unitarity_residuals(module: UqGl2Module) -> Dict[str, object]:
    """Residuals of x* = q^-1 y K1 K2^-1 and y* = q K1^-1 K2 x under the Gram form."""
    q, mode = module.q, module.precision
    x_star = module.y @ module.K1 @ module.K2inv / q
    y_star = module.K1inv @ module.K2 @ module.x * q
    return {
        "x*": _relative(_adjoint(module.x, module.gram, mode) - x_star, x_star),
        "y*": _relative(_adjoint(module.y, module.gram, mode) - y_star, y_star),
    }


def s_value(l: int, sigma, q, precision: Precision = Precision.F64):
    """s_l = (q^(-sigma+2l) - q^(sigma-2l)) / (q - q^-1), the B-spectrum on L_(m,-m)."""
    q, sigma = scalar(q, precision), scalar(sigma, precision)
    return (power(q, -sigma + 2 * l, precision) - power(q, sigma - 2 * l, precision)) / (q - 1 / q)


def explicit_b_eigenvalue(kappa: int, kappa1: int, m_n: int, sigma, q, precision: Precision = Precision.F64):
    """B^sigma eigenvalue on the explicit V(kappa, kappa1)_sigma module."""
    q, sigma = scalar(q, precision), scalar(sigma, precision)
    upper = power(q, -sigma + 2 * (kappa - kappa1 - m_n), precision)
    return (upper - power(q, sigma + 2 * kappa1, precision)) / (q - 1 / q)


def coideal_B(module: UqGl2Module, sigma) -> CoidealOperator:
    mode, q = module.precision, module.q
    sigma = scalar(sigma, mode)
    shift = theta(0, power(q, sigma, mode), q)
    matrix = (
        module.y @ module.K2inv @ module.K1inv
        + module.K1inv @ module.x @ module.K1inv
        + module.K1inv @ module.K1inv * shift
    )
    return CoidealOperator(matrix, sigma, "B")


def coideal_Bhat(module: UqGl2Module, sigma) -> CoidealOperator:
    mode, q = module.precision, module.q
    sigma = scalar(sigma, mode)
    first = module.K2inv @ module.K2inv * power(q, -sigma, mode)
    second = module.K1inv @ module.K1inv * power(q, sigma, mode)
    matrix = (first - second) / (q - 1 / q)
    return CoidealOperator(matrix, sigma, "Bhat")


def coideal_C(module: UqGl2Module) -> CoidealOperator:
    return CoidealOperator(module.K1 @ module.K2, None, "C")


def _rosengren_series(module: UqGl2Module, sigma) -> np.ndarray:
    mode, q = module.precision, module.q
    # exponents are formed in the working precision, not as float products
    sigma = scalar(sigma, mode)
    q2 = q * q
    Y = module.y @ module.K1 @ module.K2inv
    top = 2 * module.m
    x_powers = [identity(module.dim, mode)]
    y_powers = [identity(module.dim, mode)]
    for _ in range(top):
        x_powers.append(x_powers[-1] @ module.x)
        y_powers.append(y_powers[-1] @ Y)
    shifted = -power(q, 2 - 2 * sigma, mode)
    one_minus = 1 - q2
    result = zeros((module.dim, module.dim), mode)
    for l in range(top + 1):
        for k in range(top + 1):
            coefficient = (
                power(q, -(l + k) * sigma, mode) * (-1) ** k * power(q, l * l + 2 * l * k - l - k, mode)
                * one_minus ** (l + k)
                / (qpoch_finite(shifted, q2, l) * qpoch_finite(q2, q2, l) * qpoch_finite(q2, q2, k))
            )
            result = result + (x_powers[l] @ y_powers[k]) * coefficient
    return result


def _lifted(module: UqGl2Module) -> UqGl2Module:
    return build_module(module.m, module.q, Precision.HP, check=False)


def rosengren_x(module: UqGl2Module, sigma) -> np.ndarray:
    """The conjugating element x_sigma; the double series terminates on L_(m,-m).

    Its terms cancel heavily, so in double precision the series is summed in
    mpmath and only the result is rounded.
    """
    if module.precision is not Precision.F64:
        return _rosengren_series(module, sigma)
    with hp_context(max(DEFAULT_HP_BITS, mpmath.mp.prec)):
        return np.array(_rosengren_series(_lifted(module), sigma).tolist(), dtype=float)


def _conjugation_residuals(module: UqGl2Module, sigma) -> Dict[str, object]:
    conjugator = _rosengren_series(module, sigma)
    B = coideal_B(module, sigma).matrix
    Bhat = coideal_Bhat(module, sigma).matrix
    try:
        conj_inverse = inverse(conjugator, module.precision)
    except (LinAlgError, ZeroDivisionError, ValueError) as exc:
        raise SingularConjugator(f"x_sigma is singular on L_({module.m},{-module.m}): {exc}") from exc
    conjugation = _relative(conjugator @ B @ conj_inverse - Bhat, Bhat)
    intertwining = _relative(conjugator @ B - Bhat @ conjugator, Bhat) / max(1, max_abs(conjugator))
    return {"conjugation": conjugation, "intertwining": intertwining}


def rosengren_residuals(module: UqGl2Module, sigma) -> Dict[str, object]:
    """Conjugation residual |x B x^-1 - Bhat|_max and the inverse-free intertwining residual.

    Both are relative to max(1, |Bhat|_max); the intertwining one is further
    divided by |x_sigma|_max. x_sigma is too ill-conditioned for a double
    precision inverse once m >= 3, so f64 modules are lifted to mpmath for the
    whole computation and only the two residuals are rounded.
    """
    if module.precision is not Precision.F64:
        return _conjugation_residuals(module, sigma)
    with hp_context(max(DEFAULT_HP_BITS, mpmath.mp.prec)):
        residuals = _conjugation_residuals(_lifted(module), sigma)
        return {name: float(value) for name, value in residuals.items()}


def _symmetrised_tridiagonal(module: UqGl2Module, B: np.ndarray):
    """Diagonal and off-diagonal of S B S^-1 with S = diag(sqrt(gram))."""
    root = np.sqrt(np.asarray(module.gram, dtype=float))
    diagonal = np.array([float(B[k, k]) for k in range(module.dim)])
    off = np.array([float(B[k + 1, k]) * root[k + 1] / root[k] for k in range(module.dim - 1)])
    return diagonal, off, root


def _multiprecision_spectrum(module: UqGl2Module, B: np.ndarray) -> np.ndarray:
    """Same symmetrisation as the double path, diagonalised by mpmath at the current precision."""
    root = [mpmath.sqrt(scalar(g, Precision.HP)) for g in module.gram]
    T = mpmath.matrix(module.dim, module.dim)
    for k in range(module.dim):
        T[k, k] = scalar(B[k, k], Precision.HP)
    for k in range(module.dim - 1):
        T[k + 1, k] = T[k, k + 1] = scalar(B[k + 1, k], Precision.HP) * root[k + 1] / root[k]
    values = mpmath.eigsy(T, eigvals_only=True)
    return np.array(sorted(values[i] for i in range(values.rows)), dtype=object)


def spectrum(module: UqGl2Module, sigma) -> np.ndarray:
    """Eigenvalues of B^sigma in ascending order.

    Double precision uses scipy; hp and exact modules are diagonalised in mpmath.
    """
    B = coideal_B(module, sigma).matrix
    if module.precision is not Precision.F64:
        return _multiprecision_spectrum(module, B)
    if module.dim == 1:
        return np.array([float(B[0, 0])])
    diagonal, off, _ = _symmetrised_tridiagonal(module, B)
    return eigh_tridiagonal(diagonal, off, eigvals_only=True)


def _inverse_iteration(diagonal: np.ndarray, off: np.ndarray, shift: float, steps: int = 4) -> np.ndarray:
    size = len(diagonal)
    banded = np.zeros((3, size))
    banded[0, 1:] = off
    banded[1, :] = diagonal - shift
    banded[2, :-1] = off
    vector = np.ones(size) / np.sqrt(size)
    for _ in range(steps):
        try:
            vector = solve_banded((1, 1), banded, vector)
        except LinAlgError:
            banded[1, :] -= 1e-12 * max(1.0, abs(shift))
            continue
        vector /= np.linalg.norm(vector)
    return vector


def _fix_phase(vector: np.ndarray) -> np.ndarray:
    """First component of non-negligible size made real positive."""
    sizes = [abs(v) for v in vector]
    threshold = max(sizes) * 1e-14
    for value, size in zip(vector, sizes):
        if size > threshold:
            return vector * (size / value)
    return vector


def _recurrence_eigenvector(module: UqGl2Module, B: np.ndarray, target) -> np.ndarray:
    """Solve (B - s) v = 0 row by row from v_0 = 1; exact for rational entries."""
    dim, mode = module.dim, module.precision
    vector = [scalar(1, mode)]
    for k in range(dim - 1):
        acc = (B[k, k] - target) * vector[k]
        if k > 0:
            acc = acc + B[k, k - 1] * vector[k - 1]
        vector.append(-acc / B[k, k + 1])
    last = (B[dim - 1, dim - 1] - target) * vector[-1]
    if dim > 1:
        last = last + B[dim - 1, dim - 2] * vector[-2]
    if mode is Precision.EXACT:
        if last != 0:
            raise EigenvalueNotFound(f"{target} is not an exact eigenvalue of B")
        return np.array(vector, dtype=object)
    if abs(last) > EIGENVALUE_MATCH_TOL * max(1, max_abs(B)) * max_abs(vector):
        raise EigenvalueNotFound(f"{target} is not an eigenvalue of B (residual {last})")
    norm = sum(g * abs(v) ** 2 for g, v in zip(module.gram, vector)) ** 0.5
    return np.array([v / norm for v in vector], dtype=object)


def b_eigenvector(module: UqGl2Module, sigma, l: int) -> np.ndarray:
    """Eigenvector of B^sigma for s_l, unit norm in the Gram form, phase fixed.

    In exact mode the vector is scaled to have e_0 component 1 instead, since
    the Gram norm is generally irrational.
    """
    mode = module.precision
    target = s_value(l, sigma, module.q, mode)
    if abs(l) > module.m:
        raise EigenvalueNotFound(f"s_{l} lies outside the spectrum of L_({module.m},{-module.m})")
    B = coideal_B(module, sigma).matrix
    if mode is not Precision.F64:
        return _recurrence_eigenvector(module, B, target)
    if module.dim == 1:
        if abs(B[0, 0] - target) > EIGENVALUE_SEARCH_TOL * max(1.0, abs(target)):
            raise EigenvalueNotFound(f"no eigenvalue near s_{l} = {target}")
        return np.array([1.0])
    diagonal, off, root = _symmetrised_tridiagonal(module, B)
    eigenvalues = eigh_tridiagonal(diagonal, off, eigvals_only=True)
    nearest = eigenvalues[np.argmin(np.abs(eigenvalues - target))]
    gap = abs(nearest - target) / max(1.0, abs(target))
    if gap > EIGENVALUE_SEARCH_TOL:
        raise EigenvalueNotFound(f"no eigenvalue within {EIGENVALUE_SEARCH_TOL} of s_{l} = {target}")
    if gap > EIGENVALUE_MATCH_TOL:
        logger.warning("eigenvalue %.16g matches s_%d = %.16g only to %.2e", nearest, l, target, gap)
    symmetric = _inverse_iteration(diagonal, off, float(nearest))
    return _fix_phase(symmetric / root)


def spherical_restriction(mu: int, labels: SphericalLabels,
                          precision: Precision = Precision.F64) -> RestrictedSpherical:
    """f_mu restricted to the torus, from B-eigenvectors on L_(m,-m), m = mu + kappa1.

    The coefficient of u^nu (nu = m - k) is q^-nu gram_k v_k conj(w_k), with v
    the B^sigma eigenvector for s_(-kappa2) and w the B^tau eigenvector for
    s_(-kappa1).
    """
    if labels.n != 1:
        raise ValueError("spherical_restriction is implemented for n = 1 only")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    mode = as_precision(precision)
    m = mu + labels.kappa1
    module = build_module(m, labels.q, mode)
    v = b_eigenvector(module, labels.sigma, -labels.kappa2)
    w = b_eigenvector(module, labels.tau, -labels.kappa1)
    terms = {}
    for k in range(module.dim):
        nu = m - k
        terms[(nu,)] = power(module.q, -nu, mode) * module.gram[k] * v[k] * w[k].conjugate()
    poly = LaurentPoly(1, terms)
    if poly.is_zero() or (mode is not Precision.EXACT and poly.max_abs_coefficient() < ZERO_FUNCTION_TOL):
        raise ZeroFunction(f"restricted spherical function vanishes for mu={mu}, {labels}")
    return RestrictedSpherical(mu, labels, poly)


def verify_theorem_iii_rank1(mu: int, labels: SphericalLabels, grid: Optional[QuadratureGrid] = None,
                             policy: Optional[TruncationPolicy] = None,
                             precision: Precision = Precision.F64) -> RankOneCheck:
    """Compare f_mu|_T with P_mu * f_0|_T, the scale fixed by the top coefficient.

    P_mu comes from the torus pairing when the mapped parameters are inside
    the positive regime, and from the closed-form moments otherwise.
    """
    f_mu = spherical_restriction(mu, labels, precision).poly
    f_0 = spherical_restriction(0, labels, precision).poly
    params = spherical_parameter_map(labels)
    if validate_params(params):
        if grid is None:
            grid = auto_grid(max(mu, 1), params, rank=1, policy=policy)
        measure = TorusMeasure(params, grid, policy)
        grid_points = grid.points_per_circle
    else:
        logger.warning("parameters %s are outside the torus regime, using the moment functional", params)
        measure = AskeyWilsonMoments(params)
        grid_points = None
    P = mk_polynomial((mu,), params, measure=measure, precision=precision)
    scale, residual = projective_residual(f_mu, P.poly * f_0)
    return RankOneCheck(mu, measure.route, complex(scale), residual, grid_points)


def verify_theorem_i_rank1(mu: int, labels: SphericalLabels, precision: Precision = Precision.F64) -> dict:
    """f_0|_T divides f_mu|_T, with a symmetric quotient of degree mu."""
    f_mu = spherical_restriction(mu, labels, precision).poly
    f_0 = spherical_restriction(0, labels, precision).poly
    quotient, remainder = f_mu.divmod_univariate(f_0)
    scale = float(f_mu.max_abs_coefficient())
    quotient_scale = float(quotient.max_abs_coefficient()) if quotient else 1.0
    return {
        "mu": mu,
        "remainder": float(remainder.max_abs_coefficient()) / scale,
        "quotient_degree": quotient.degree(),
        "quotient_symmetric": is_w_invariant(quotient, tol=1e-9 * quotient_scale),
    }


def branching_check(m: int, sigma, kappa2: int, q=0.5, precision: Precision = Precision.F64) -> int:
    """Multiplicity of s_(-kappa2) in the B^sigma spectrum of L_(m,-m)."""
    module = build_module(m, q, precision)
    target = s_value(-kappa2, sigma, module.q, module.precision)
    if module.precision is Precision.EXACT:
        target = scalar(target, Precision.HP)
    tol = EIGENVALUE_SEARCH_TOL * max(1, abs(target))
    return sum(1 for value in spectrum(module, sigma) if abs(value - target) <= tol)


def spectrum_table(m: int, sigma, q, precision: Precision = Precision.F64) -> List[dict]:
    """Computed B^sigma eigenvalues next to s_l for l = -m..m, with the absolute error."""
    module = build_module(m, q, precision)
    eigenvalues = spectrum(module, sigma)
    rows = []
    for index, l in enumerate(range(-m, m + 1)):
        expected = s_value(l, sigma, module.q, module.precision)
        if module.precision is Precision.EXACT:
            expected = scalar(expected, Precision.HP)
        computed = eigenvalues[index]
        rows.append({
            "l": l,
            "s_l": float(expected),
            "eigenvalue": float(computed),
            "error": float(abs(computed - expected)),
        })
    return rows
