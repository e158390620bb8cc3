"""
Koornwinder weight on the compact torus and the normalised pairing it defines.

The pairing is computed with the tensor-product trapezoidal rule on M^n
equispaced points. Weights are evaluated once per (params, grid, policy) and
reused for every pairing and Gram matrix built from them.
"""
import logging
import math
import multiprocessing
from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .qseries import DEFAULT_POLICY, QBase, TruncationPolicy, qpoch_infinite, qpoch_infinite_array
from .symlaurent import LaurentPoly, RankMismatchError, orbit_sum, partitions_up_to

logger = logging.getLogger(__name__)

UNIT_CIRCLE_TOL = 1e-12
DIVERGENCE_TOL = 1e-13
NON_REAL_TOL = 1e-8


class DivergentFactor(ArithmeticError):
    """A denominator factor of the weight vanished at an evaluation point."""


class NonRealResult(ArithmeticError):
    """The weight came out with a significant imaginary part."""


class NoConvergence(RuntimeError):
    """Grid refinement did not settle within the allowed number of doublings."""


class ParameterRegimeError(ValueError):
    """Parameters lie outside the regime where the torus weight is positive."""


@dataclass(frozen=True)
class MKParams:
    """The couplings (a, b, c, d), the second parameter t and the base q."""

    a: float
    b: float
    c: float
    d: float
    t: float
    q: float

    def __post_init__(self):
        QBase(float(self.q))

    @property
    def couplings(self) -> Tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def with_couplings(self, couplings: Sequence[float]) -> "MKParams":
        a, b, c, d = couplings
        return replace(self, a=a, b=b, c=c, d=d)

    def as_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in ("a", "b", "c", "d", "t", "q")}


def validate_params(params: MKParams) -> bool:
    """True iff |a|,|b|,|c|,|d| < 1 and 0 < t < 1 with all parameters real."""
    values = params.couplings + (params.t,)
    if any(isinstance(v, complex) and v.imag != 0 for v in values):
        return False
    return all(abs(v) < 1 for v in params.couplings) and 0 < params.t < 1


@dataclass(frozen=True)
class QuadratureGrid:
    points_per_circle: int
    rank: int = 1

    def __post_init__(self):
        if self.points_per_circle < 4:
            raise ValueError("a quadrature grid needs at least 4 points per circle")
        if self.rank < 1:
            raise ValueError("rank must be positive")

    @property
    def size(self) -> int:
        return self.points_per_circle ** self.rank

    def angles(self) -> np.ndarray:
        """Array of shape (M^n, n); rows in lexicographic order of the point indices."""
        circle = 2 * np.pi * np.arange(self.points_per_circle) / self.points_per_circle
        mesh = np.meshgrid(*([circle] * self.rank), indexing="ij")
        return np.stack([axis.ravel() for axis in mesh], axis=1)

    def points(self) -> np.ndarray:
        return np.exp(1j * self.angles())


def _check_torus_point(u: Sequence[complex]) -> None:
    for coordinate in u:
        if abs(abs(coordinate) - 1) > UNIT_CIRCLE_TOL:
            raise ValueError(f"{coordinate} is not on the unit circle")


def _ratio(numerator, denominator):
    if abs(denominator) < DIVERGENCE_TOL:
        raise DivergentFactor(f"denominator factor {denominator} vanishes")
    return numerator / denominator


def delta_plus_eval(u: Sequence[complex], params: MKParams,
                    policy: Optional[TruncationPolicy] = None) -> complex:
    """Delta^+(u) as a product of truncated infinite q-shifted factorials."""
    policy = policy or DEFAULT_POLICY
    _check_torus_point(u)
    q = params.q
    value: complex = 1
    for z in u:
        denominator = 1
        for coupling in params.couplings:
            denominator *= qpoch_infinite(coupling * z, q, policy)
        value *= _ratio(qpoch_infinite(z * z, q, policy), denominator)
    for i, j in combinations(range(len(u)), 2):
        ratio, prod = u[i] / u[j], u[i] * u[j]
        numerator = qpoch_infinite(ratio, q, policy) * qpoch_infinite(prod, q, policy)
        denominator = qpoch_infinite(params.t * ratio, q, policy) * qpoch_infinite(params.t * prod, q, policy)
        value *= _ratio(numerator, denominator)
    return complex(value)


def _real_weight(value: complex) -> float:
    if abs(value.imag) > NON_REAL_TOL * abs(value):
        raise NonRealResult(f"weight {value} is not real")
    return value.real


def delta_eval(u: Sequence[complex], params: MKParams, policy: Optional[TruncationPolicy] = None) -> float:
    """Delta(u) = Delta^+(u) Delta^+(u^-1)."""
    inverse = [1 / z for z in u]
    return _real_weight(delta_plus_eval(u, params, policy) * delta_plus_eval(inverse, params, policy))


def _delta_plus_array(points: np.ndarray, params: MKParams, policy: TruncationPolicy) -> np.ndarray:
    q = params.q
    value = np.ones(points.shape[0], dtype=complex)
    for col in range(points.shape[1]):
        z = points[:, col]
        denominator = np.ones_like(z)
        for coupling in params.couplings:
            denominator *= qpoch_infinite_array(coupling * z, q, policy)
        if np.min(np.abs(denominator)) < DIVERGENCE_TOL:
            raise DivergentFactor("a coupling factor vanishes on the grid")
        value *= qpoch_infinite_array(z * z, q, policy) / denominator
    for i, j in combinations(range(points.shape[1]), 2):
        ratio, prod = points[:, i] / points[:, j], points[:, i] * points[:, j]
        denominator = qpoch_infinite_array(params.t * ratio, q, policy) * qpoch_infinite_array(
            params.t * prod, q, policy
        )
        if np.min(np.abs(denominator)) < DIVERGENCE_TOL:
            raise DivergentFactor("a t-factor vanishes on the grid")
        value *= qpoch_infinite_array(ratio, q, policy) * qpoch_infinite_array(prod, q, policy) / denominator
    return value


def delta_on_angles(angles: np.ndarray, params: MKParams, policy: TruncationPolicy) -> np.ndarray:
    """Vectorised Delta at u = exp(i*angles); angles has shape (N, n)."""
    points = np.exp(1j * angles)
    value = _delta_plus_array(points, params, policy) * _delta_plus_array(np.conj(points), params, policy)
    bad = np.abs(value.imag) > NON_REAL_TOL * np.abs(value)
    if np.any(bad):
        raise NonRealResult(f"weight is not real at {int(np.count_nonzero(bad))} grid points")
    return value.real


def delta_chunk_worker(job: Tuple[np.ndarray, MKParams, TruncationPolicy]) -> np.ndarray:
    """Worker function for parallel weight evaluation on a block of grid rows."""
    angles, params, policy = job
    return delta_on_angles(angles, params, policy)


def _exact_sum(values: np.ndarray) -> complex:
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return math.fsum(values)


class TorusMeasure:
    """Normalised pairing <p, r> = h(r* p) for one parameter set on one grid."""

    # Grids smaller than this are always evaluated in-process.
    PARALLEL_MIN_POINTS = 4096
    positive = True
    route = "torus"

    def __init__(self, params: MKParams, grid: QuadratureGrid, policy: Optional[TruncationPolicy] = None,
                 strict: bool = True, max_workers: Optional[int] = None, deterministic: bool = True):
        if strict and not validate_params(params):
            raise ParameterRegimeError(f"parameters outside |a|,|b|,|c|,|d|<1, 0<t<1: {params}")
        self.params = params
        self.grid = grid
        self.policy = policy or DEFAULT_POLICY
        self.max_workers = max_workers
        self.deterministic = deterministic
        self._weights: Optional[np.ndarray] = None
        self._angles: Optional[np.ndarray] = None

    @property
    def angles(self) -> np.ndarray:
        if self._angles is None:
            self._angles = self.grid.angles()
        return self._angles

    @property
    def weights(self) -> np.ndarray:
        if self._weights is None:
            self._weights = self._evaluate_weights()
        return self._weights

    def _evaluate_weights(self) -> np.ndarray:
        if self.max_workers and self.max_workers > 1 and self.grid.size >= self.PARALLEL_MIN_POINTS:
            try:
                return self._parallel_weights()
            except (DivergentFactor, NonRealResult):
                raise
            except Exception as exc:
                logger.warning("Parallel weight evaluation failed, falling back to serial: %s", exc)
        return delta_on_angles(self.angles, self.params, self.policy)

    def _parallel_weights(self) -> np.ndarray:
        blocks = np.array_split(self.angles, self.max_workers)
        jobs = [(block, self.params, self.policy) for block in blocks if len(block)]
        with multiprocessing.Pool(processes=self.max_workers) as pool:
            results = pool.map(delta_chunk_worker, jobs)
        return np.concatenate(results)

    def _sum(self, values: np.ndarray) -> complex:
        if self.deterministic:
            return _exact_sum(values)
        total = np.sum(values)
        return complex(total) if np.iscomplexobj(values) else float(total)

    @property
    def normalizer(self) -> float:
        """Mean of the weight over the grid, i.e. the raw integral of 1."""
        return float(self._sum(self.weights)) / self.grid.size

    def expectation(self, f: LaurentPoly, raw: bool = False) -> complex:
        if f.rank != self.grid.rank:
            raise RankMismatchError(f"polynomial rank {f.rank} != grid rank {self.grid.rank}")
        total = self._sum(f.evaluate_torus(self.angles) * self.weights)
        if raw:
            return complex(total) / self.grid.size
        return complex(total) / float(self._sum(self.weights))

    def pairing(self, p: LaurentPoly, r: LaurentPoly) -> complex:
        """h(r* p); on the torus r* takes the complex conjugate of r's values."""
        if p.rank != r.rank:
            raise RankMismatchError(f"rank mismatch: {p.rank} != {r.rank}")
        return self.expectation(r.star() * p)

    def gram(self, basis: List[LaurentPoly]) -> np.ndarray:
        """G[i, j] = <basis_i, basis_j>."""
        values = np.array([poly.evaluate_torus(self.angles) for poly in basis])
        weights = self.weights
        total = float(self._sum(weights))
        if not self.deterministic:
            return (values * weights) @ values.conj().T / total
        size = len(basis)
        out = np.zeros((size, size), dtype=complex)
        for i in range(size):
            weighted = values[i] * weights
            for j in range(i, size):
                out[i, j] = self._sum(weighted * np.conj(values[j])) / total
                out[j, i] = np.conj(out[i, j])
        return out


@lru_cache(maxsize=32)
def cached_measure(params: MKParams, grid: QuadratureGrid, policy: TruncationPolicy) -> TorusMeasure:
    return TorusMeasure(params, grid, policy)


def haar_pairing(p: LaurentPoly, r: LaurentPoly, params: MKParams, grid: QuadratureGrid,
                 policy: Optional[TruncationPolicy] = None) -> complex:
    """h(r* p) with h(1) = 1."""
    if p.rank != grid.rank or r.rank != grid.rank:
        raise RankMismatchError("polynomials and grid must share the same rank")
    return cached_measure(params, grid, policy or DEFAULT_POLICY).pairing(p, r)


def orbit_sum_gram(measure, rank: int, max_degree: int) -> np.ndarray:
    basis = [orbit_sum(lam) for lam in partitions_up_to(rank, max_degree)]
    return measure.gram(basis)


def auto_grid(max_degree: int, params: MKParams, tol: float = 1e-10, rank: int = 1,
              policy: Optional[TruncationPolicy] = None, max_doublings: int = 6) -> QuadratureGrid:
    """Double M from 2*max_degree + 16 until the orbit-sum Gram matrix settles to ``tol``."""
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")
    policy = policy or DEFAULT_POLICY
    grid = QuadratureGrid(2 * max_degree + 16, rank)
    previous = orbit_sum_gram(TorusMeasure(params, grid, policy), rank, max_degree)
    for _ in range(max_doublings):
        finer = QuadratureGrid(2 * grid.points_per_circle, rank)
        current = orbit_sum_gram(TorusMeasure(params, finer, policy), rank, max_degree)
        change = float(np.max(np.abs(current - previous)) / max(1.0, float(np.max(np.abs(current)))))
        logger.info("auto_grid: M=%d relative change %.3e", finer.points_per_circle, change)
        if change < tol:
            return finer
        grid, previous = finer, current
    raise NoConvergence(
        f"Gram matrix still changing after {max_doublings} doublings (M={grid.points_per_circle})"
    )
