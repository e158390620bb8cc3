"""
q-shifted factorials, symmetric q-numbers and the theta_l scalars.

All functions work in whatever scalar type they are handed (float, complex,
Fraction, mpmath numbers) and ``qpoch_finite`` also accepts ring elements
such as ``LaurentPoly`` for ``x``.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

logger = logging.getLogger(__name__)


class TruncationFailure(ArithmeticError):
    """The tail bound for an infinite product could not be met within max_terms."""


@dataclass(frozen=True)
class QBase:
    q: float

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError(f"q must satisfy 0 < q < 1, got {self.q}")


@dataclass(frozen=True)
class TruncationPolicy:
    epsilon: float = 1e-16
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_POLICY = TruncationPolicy()

QLike = Union[QBase, float]


def _q(q: QLike):
    return q.q if isinstance(q, QBase) else q


def qpoch_finite(x, q: QLike, k: int):
    """(x; q)_k = prod_{i<k} (1 - x q^i); (x; q)_0 = 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    q = _q(q)
    result = 1
    for i in range(k):
        result = result * (1 - x * q ** i)
    return result


def truncation_depth(modulus: float, q: float, policy: TruncationPolicy) -> int:
    """Smallest K with |x| q^K <= 1/2 and 2 |x| q^K / (1 - q) <= log(1 + epsilon)."""
    if modulus == 0:
        return 0
    bound = min(0.5, math.log1p(policy.epsilon) * (1 - q) / 2)
    if modulus <= bound:
        return 0
    depth = math.ceil(math.log(bound / modulus) / math.log(q))
    # guard against rounding in the logarithms
    while modulus * q ** depth > bound:
        depth += 1
    if depth > policy.max_terms:
        raise TruncationFailure(
            f"|x|={modulus:.3g}, q={q:.3g} needs {depth} factors, more than max_terms={policy.max_terms}"
        )
    return depth


def qpoch_infinite(x, q: QLike, policy: Optional[TruncationPolicy] = None):
    """(x; q)_infinity truncated so that the dropped tail has relative error <= epsilon."""
    policy = policy or DEFAULT_POLICY
    q = _q(q)
    if x == 0:
        return 1
    depth = truncation_depth(float(abs(x)), float(q), policy)
    logger.debug("qpoch_infinite: |x|=%g q=%g depth=%d", float(abs(x)), float(q), depth)
    return qpoch_finite(x, q, depth)


def qpoch_infinite_array(x: np.ndarray, q: float, policy: Optional[TruncationPolicy] = None) -> np.ndarray:
    """Elementwise (x; q)_infinity, one truncation depth for the whole array."""
    policy = policy or DEFAULT_POLICY
    x = np.asarray(x, dtype=complex)
    depth = truncation_depth(float(np.max(np.abs(x))) if x.size else 0.0, float(q), policy)
    result = np.ones_like(x)
    factor = x.copy()
    for _ in range(depth):
        result *= 1 - factor
        factor *= q
    return result


def q_number(alpha: int, q: QLike):
    """Symmetric q-number [alpha]_q = (q^alpha - q^-alpha) / (q - q^-1)."""
    q = _q(q)
    return (q ** alpha - q ** (-alpha)) / (q - 1 / q)


def theta(l: int, s, q: QLike):
    """theta_l(s) = (s^-1 - s q^(-2l)) / (q - q^-1)."""
    if s == 0:
        raise ValueError("theta_l(s) needs s != 0")
    q = _q(q)
    return (1 / s - s * q ** (-2 * l)) / (q - 1 / q)
