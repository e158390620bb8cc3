"""
Monic Macdonald-Koornwinder polynomials by orthogonalisation, plus the index
maps and closed-form ground states used by the spherical-function side.

P_lambda is m_lambda plus a combination of lower orbit sums, fixed by
orthogonality to every lower orbit sum. The coefficients solve one linear
system in the Gram matrix of the lower orbit sums, taken from whichever
pairing is supplied (torus quadrature or the rank-one moment functional).
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .precision import Precision, as_precision, condition_number, power, scalar, solve
from .qseries import QBase, TruncationPolicy, qpoch_finite
from .symlaurent import (
    LaurentPoly,
    MultiIndex,
    NotAPartitionError,
    Partition,
    as_partition,
    dominance_leq,
    orbit_sum,
    partitions_up_to,
)
from .torus_measure import MKParams, QuadratureGrid, TorusMeasure, auto_grid

logger = logging.getLogger(__name__)

SINGULAR_CONDITION = 1e12
WARN_CONDITION = 1e9
IMAGINARY_TOL = 1e-13


class SingularGram(ArithmeticError):
    """The Gram matrix of the lower orbit sums is (numerically) singular."""


@dataclass(frozen=True)
class SphericalLabels:
    n: int
    kappa1: int
    kappa2: int
    kappa: int
    sigma: float
    tau: float
    q: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.kappa < 0 or self.kappa1 < 0:
            raise ValueError("kappa and kappa1 must be nonnegative")
        if abs(self.kappa2) > self.kappa1:
            raise ValueError("kappa2 must satisfy -kappa1 <= kappa2 <= kappa1")
        QBase(float(self.q))

    def as_dict(self) -> dict:
        return {
            "n": self.n, "kappa1": self.kappa1, "kappa2": self.kappa2, "kappa": self.kappa,
            "sigma": float(self.sigma), "tau": float(self.tau), "q": float(self.q),
        }


@dataclass(frozen=True)
class MKPolynomial:
    label: Partition
    poly: LaurentPoly
    params: MKParams
    gram_diag: float
    coefficients: Dict[Partition, complex] = field(default_factory=dict)
    condition: float = 1.0


@dataclass
class MKFamily:
    labels: List[Partition]
    polynomials: List[MKPolynomial]
    residuals: np.ndarray
    max_offdiag: float
    incomparable_pairs: List[Tuple[Partition, Partition]]


def dominance_poset(labels: Sequence[Partition]) -> nx.DiGraph:
    """Hasse diagram of the dominance order on ``labels`` (edge mu -> lambda when mu < lambda)."""
    graph = nx.DiGraph()
    graph.add_nodes_from(labels)
    for lam in labels:
        for mu in labels:
            if mu != lam and dominance_leq(mu, lam):
                graph.add_edge(mu, lam)
    return nx.transitive_reduction(graph)


def ordered_labels(labels: Sequence[Partition]) -> List[Partition]:
    """Topological order of the dominance poset, ties broken by size then entries."""
    poset = dominance_poset(labels)
    return list(nx.lexicographical_topological_sort(poset, key=lambda lam: (sum(lam), lam)))


def lower_labels(lam: Sequence[int]) -> List[Partition]:
    """Partitions mu <= lam (including lam itself) in topological order."""
    lam = as_partition(lam)
    candidates = [mu for mu in partitions_up_to(len(lam), sum(lam)) if dominance_leq(mu, lam)]
    return ordered_labels(candidates)


def _clean_real(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    if values.dtype == object:
        return values
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    if np.iscomplexobj(values) and np.all(np.abs(values.imag) <= IMAGINARY_TOL * scale):
        return values.real
    return values


def _default_measure(params: MKParams, rank: int, degree: int, grid: Optional[QuadratureGrid],
                     policy: Optional[TruncationPolicy]):
    if grid is None:
        grid = auto_grid(degree, params, rank=rank, policy=policy)
    if grid.rank != rank:
        raise ValueError(f"grid rank {grid.rank} does not match partition length {rank}")
    return TorusMeasure(params, grid, policy)


def _solve_coefficients(lam: Partition, labels: List[Partition], gram: np.ndarray,
                        precision: Precision) -> Tuple[Dict[Partition, complex], float]:
    """Coefficients c_mu (mu < lam) with <m_lam + sum c_mu m_mu, m_nu> = 0 for all nu < lam."""
    target = labels.index(lam)
    lower = [i for i, mu in enumerate(labels) if mu != lam and dominance_leq(mu, lam)]
    if not lower:
        return {}, 1.0
    block = gram[np.ix_(lower, lower)]
    cond = condition_number(block)
    if cond > SINGULAR_CONDITION:
        raise SingularGram(f"Gram matrix for {lam} has condition number {cond:.3e}")
    if cond > WARN_CONDITION:
        logger.warning("Gram matrix for %s is ill-conditioned (cond %.3e)", lam, cond)
    rhs = -gram[target, lower]
    # <sum_mu c_mu m_mu, m_nu> = sum_mu c_mu G[mu, nu]
    solution = _clean_real(np.asarray(solve(block.T, rhs, precision)))
    return {labels[i]: solution[k] for k, i in enumerate(lower)}, cond


def _assemble(lam: Partition, coefficients: Dict[Partition, complex]) -> LaurentPoly:
    poly = orbit_sum(lam)
    for mu, value in coefficients.items():
        poly = poly + orbit_sum(mu) * value
    return poly


def mk_polynomial(lam: Sequence[int], params: MKParams, grid: Optional[QuadratureGrid] = None,
                  measure=None, policy: Optional[TruncationPolicy] = None,
                  precision: Precision = Precision.F64) -> MKPolynomial:
    """Monic P_lambda, orthogonal to every lower orbit sum under ``measure``.

    Without an explicit measure the torus pairing is used on ``grid``, or on
    an ``auto_grid`` sized for |lambda| when no grid is given.
    """
    lam = as_partition(lam)
    precision = as_precision(precision)
    labels = lower_labels(lam)
    if measure is None:
        measure = _default_measure(params, len(lam), sum(lam), grid, policy)
    gram = _clean_real(measure.gram([orbit_sum(mu) for mu in labels]))
    coefficients, cond = _solve_coefficients(lam, labels, gram, precision)
    poly = _assemble(lam, coefficients)
    norm = _clean_real(np.array([measure.pairing(poly, poly)]))[0]
    _check_norm(lam, norm, measure)
    return MKPolynomial(lam, poly, params, float(np.real(norm)), coefficients, cond)


def _check_norm(lam: Partition, norm, measure) -> None:
    if getattr(measure, "positive", False) and not np.real(norm) > 0:
        raise SingularGram(f"<P, P> = {norm} is not positive for {lam}")
    if norm == 0:
        raise SingularGram(f"<P, P> vanishes for {lam}")


def mk_family(max_deg: int, params: MKParams, grid: Optional[QuadratureGrid] = None, rank: int = 1,
              measure=None, policy: Optional[TruncationPolicy] = None,
              precision: Precision = Precision.F64) -> MKFamily:
    """All P_lambda with |lambda| <= max_deg and their normalised Gram residual matrix."""
    if max_deg < 0:
        raise ValueError("max_deg must be nonnegative")
    precision = as_precision(precision)
    labels = ordered_labels(partitions_up_to(rank, max_deg))
    if measure is None:
        measure = _default_measure(params, rank, max_deg, grid, policy)
    gram = _clean_real(measure.gram([orbit_sum(lam) for lam in labels]))

    size = len(labels)
    transform = np.zeros((size, size), dtype=gram.dtype if np.iscomplexobj(gram) else float)
    polynomials: List[MKPolynomial] = []
    for row, lam in enumerate(labels):
        coefficients, cond = _solve_coefficients(lam, labels, gram, precision)
        transform[row, row] = 1
        for mu, value in coefficients.items():
            transform[row, labels.index(mu)] = complex(value) if np.iscomplexobj(transform) else float(value)
        norm = (transform[row] @ gram @ transform[row].conj())
        _check_norm(lam, norm, measure)
        polynomials.append(
            MKPolynomial(lam, _assemble(lam, coefficients), params, float(np.real(norm)), coefficients, cond)
        )

    pairings = transform @ gram @ transform.conj().T
    diag = np.sqrt(np.abs(np.diag(pairings)))
    residuals = np.abs(pairings) / np.outer(diag, diag)
    offdiag = residuals - np.diag(np.diag(residuals))
    incomparable = [
        (labels[i], labels[j])
        for i in range(size) for j in range(i + 1, size)
        if not (dominance_leq(labels[i], labels[j]) or dominance_leq(labels[j], labels[i]))
    ]
    return MKFamily(labels, polynomials, residuals, float(offdiag.max()) if size > 1 else 0.0, incomparable)


def delta_partition(kappa: int, kappa1: int, n: int) -> Partition:
    """(kappa1 + (n-1) kappa, kappa1 + (n-2) kappa, ..., kappa1)."""
    if kappa < 0 or kappa1 < 0:
        raise ValueError("kappa and kappa1 must be nonnegative")
    if n < 1:
        raise ValueError("n must be positive")
    return tuple(kappa1 + (n - 1 - i) * kappa for i in range(n))


def natural_embed(mu: Sequence[int]) -> MultiIndex:
    mu = tuple(int(v) for v in mu)
    return mu + tuple(-v for v in reversed(mu))


def flat_map(lam: Sequence[int]) -> MultiIndex:
    lam = tuple(int(v) for v in lam)
    if len(lam) % 2:
        raise ValueError(f"flat_map needs an even rank, got {len(lam)}")
    n = len(lam) // 2
    return tuple(lam[i] + lam[-1 - i] for i in range(n))


def ground_state_restriction(labels: SphericalLabels, precision: Precision = Precision.F64) -> LaurentPoly:
    """The product formula for f_0 restricted to the torus, normalised with C = 1."""
    n, q = labels.n, labels.q
    base = power(q, 2, precision)
    sigma, tau = scalar(labels.sigma, precision), scalar(labels.tau, precision)
    first = power(q, 1 - sigma + tau, precision)
    second = -power(q, 1 + sigma + tau, precision)
    result = LaurentPoly.monomial(delta_partition(labels.kappa, labels.kappa1, n))
    for i in range(n):
        inverse = LaurentPoly.variable(n, i, -1)
        result = result * qpoch_finite(inverse * first, base, labels.kappa1 - labels.kappa2)
        result = result * qpoch_finite(inverse * second, base, labels.kappa1 + labels.kappa2)
    for i in range(n):
        for j in range(i + 1, n):
            ratio = LaurentPoly.variable(n, i, -1) * LaurentPoly.variable(n, j, 1)
            product = LaurentPoly.variable(n, i, -1) * LaurentPoly.variable(n, j, -1)
            result = result * qpoch_finite(ratio * base, base, labels.kappa)
            result = result * qpoch_finite(product * base, base, labels.kappa)
    return result


def spherical_parameter_map(labels: SphericalLabels, precision: Precision = Precision.F64) -> MKParams:
    """Koornwinder parameters (base q^2, t = q^(2 kappa + 2)) attached to the labels.

    The couplings come from the weight f_0 f_0^* Delta: each q^2-shifted
    factor of the ground state moves a or d by q^2, so the shifts are
    2(kappa1 + kappa2) and 2(kappa1 - kappa2).
    """
    q = labels.q
    s, t = scalar(labels.sigma, precision), scalar(labels.tau, precision)
    k1, k2 = labels.kappa1, labels.kappa2
    return MKParams(
        a=-power(q, s + t + 1 + 2 * (k1 + k2), precision),
        b=-power(q, 1 - s - t, precision),
        c=power(q, s - t + 1, precision),
        d=power(q, -s + t + 1 + 2 * (k1 - k2), precision),
        t=power(q, 2 * labels.kappa + 2, precision),
        q=power(q, 2, precision),
    )


__all__ = [
    "MKFamily",
    "MKPolynomial",
    "NotAPartitionError",
    "SingularGram",
    "SphericalLabels",
    "delta_partition",
    "dominance_poset",
    "flat_map",
    "ground_state_restriction",
    "lower_labels",
    "mk_family",
    "mk_polynomial",
    "natural_embed",
    "ordered_labels",
    "spherical_parameter_map",
]
