"""
Sparse multivariate Laurent polynomials with the hyperoctahedral group action.

The group W = S_n x {+1,-1}^n acts on exponent vectors by permuting
coordinates and flipping signs, and on C[u^{+-1}] through its exponents.
Coefficients may be any scalar supporting ring arithmetic (int, float,
complex, ``fractions.Fraction``, mpmath numbers), so the same type serves the
floating-point quadrature pipeline and exact identities.
"""
from dataclasses import dataclass
from itertools import permutations, product
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

MultiIndex = Tuple[int, ...]
Partition = Tuple[int, ...]


class RankMismatchError(ValueError):
    pass


class NotAPartitionError(ValueError):
    pass


class ZeroCoordinateError(ValueError):
    pass


def graded_lex_key(exponent: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    return (sum(abs(e) for e in exponent), tuple(exponent))


def _check_rank(lam: Sequence[int], mu: Sequence[int]) -> None:
    if len(lam) != len(mu):
        raise RankMismatchError(f"rank mismatch: {len(lam)} != {len(mu)}")


def dominance_leq(lam: Sequence[int], mu: Sequence[int]) -> bool:
    """BC-type dominance: every prefix sum of ``lam`` is at most that of ``mu``."""
    _check_rank(lam, mu)
    left = right = 0
    for a, b in zip(lam, mu):
        left += a
        right += b
        if left > right:
            return False
    return True


def a_dominance_leq(lam: Sequence[int], mu: Sequence[int]) -> bool:
    """A-type dominance: prefix sums compared and the totals must agree."""
    return dominance_leq(lam, mu) and sum(lam) == sum(mu)


def is_partition(entries: Sequence[int]) -> bool:
    values = list(entries)
    if not values:
        return False
    return all(v >= 0 for v in values) and all(a >= b for a, b in zip(values, values[1:]))


def as_partition(entries: Sequence[int]) -> Partition:
    values = tuple(int(v) for v in entries)
    if not is_partition(values):
        raise NotAPartitionError(f"not a partition: {values}")
    return values


def partitions_up_to(n: int, max_size: int) -> List[Partition]:
    """All partitions of length ``n`` with |lambda| <= ``max_size``, graded-lex ordered."""
    if n < 1:
        raise ValueError("rank must be positive")
    found: List[Partition] = []

    def extend(prefix: List[int], remaining: int, cap: int) -> None:
        if len(prefix) == n:
            found.append(tuple(prefix))
            return
        for part in range(min(cap, remaining), -1, -1):
            extend(prefix + [part], remaining - part, part)

    extend([], max_size, max_size)
    return sorted(found, key=graded_lex_key)


@dataclass(frozen=True)
class SignedPermutation:
    """Maps the basis vector e_i to ``signs[i] * e_{perm[i]}`` (0-based)."""

    perm: Tuple[int, ...]
    signs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.perm) != len(self.signs):
            raise RankMismatchError("perm and signs must have the same length")
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError(f"signs must be +1 or -1: {self.signs}")

    @property
    def rank(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(tuple(range(n)), (1,) * n)

    @classmethod
    def transposition(cls, n: int, i: int) -> "SignedPermutation":
        """Swap coordinates i and i+1."""
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        return cls(tuple(perm), (1,) * n)

    @classmethod
    def sign_flip(cls, n: int, i: int) -> "SignedPermutation":
        signs = [1] * n
        signs[i] = -1
        return cls(tuple(range(n)), tuple(signs))

    @classmethod
    def reversal(cls, n: int) -> "SignedPermutation":
        """Longest element of S_n: i -> n-1-i."""
        return cls(tuple(range(n - 1, -1, -1)), (1,) * n)

    @classmethod
    def generators(cls, n: int) -> List["SignedPermutation"]:
        return [cls.transposition(n, i) for i in range(n - 1)] + [cls.sign_flip(n, n - 1)]

    def __mul__(self, other: "SignedPermutation") -> "SignedPermutation":
        if self.rank != other.rank:
            raise RankMismatchError("cannot compose signed permutations of different rank")
        perm = tuple(self.perm[other.perm[i]] for i in range(self.rank))
        signs = tuple(other.signs[i] * self.signs[other.perm[i]] for i in range(self.rank))
        return SignedPermutation(perm, signs)

    def apply(self, exponent: Sequence[int]) -> MultiIndex:
        if len(exponent) != self.rank:
            raise RankMismatchError(f"rank mismatch: {len(exponent)} != {self.rank}")
        image = [0] * self.rank
        for i, value in enumerate(exponent):
            image[self.perm[i]] = self.signs[i] * value
        return tuple(image)


class LaurentPoly:
    """Immutable finitely supported map from exponent vectors to coefficients.

    Terms are kept sorted by the graded-lex key ``(sum |e_i|, e)``. Exact zeros
    are always dropped; ``drop_below`` additionally drops coefficients of
    modulus at most that threshold at construction time.
    """

    __slots__ = ("_rank", "_terms")
    # keep numpy scalars from broadcasting over polynomials
    __array_ufunc__ = None

    def __init__(self, rank: int, terms: Optional[Mapping[Sequence[int], object]] = None,
                 drop_below: float = 0.0):
        if rank < 1:
            raise ValueError("rank must be positive")
        collected: Dict[MultiIndex, object] = {}
        for exponent, coefficient in (terms or {}).items():
            key = tuple(int(e) for e in exponent)
            if len(key) != rank:
                raise RankMismatchError(f"exponent {key} does not have rank {rank}")
            if key in collected:
                collected[key] = collected[key] + coefficient
            else:
                collected[key] = coefficient
        kept = {
            key: value for key, value in collected.items()
            if value != 0 and (drop_below <= 0 or abs(value) > drop_below)
        }
        self._rank = rank
        self._terms: Tuple[Tuple[MultiIndex, object], ...] = tuple(
            (key, kept[key]) for key in sorted(kept, key=graded_lex_key)
        )

    # construction helpers
    @classmethod
    def zero(cls, rank: int) -> "LaurentPoly":
        return cls(rank)

    @classmethod
    def constant(cls, rank: int, value=1) -> "LaurentPoly":
        return cls(rank, {(0,) * rank: value})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coefficient=1) -> "LaurentPoly":
        return cls(len(exponent), {tuple(exponent): coefficient})

    @classmethod
    def variable(cls, rank: int, index: int, power: int = 1) -> "LaurentPoly":
        exponent = [0] * rank
        exponent[index] = power
        return cls.monomial(exponent)

    # inspection
    @property
    def rank(self) -> int:
        return self._rank

    @property
    def terms(self) -> Tuple[Tuple[MultiIndex, object], ...]:
        return self._terms

    def as_dict(self) -> Dict[MultiIndex, object]:
        return dict(self._terms)

    def support(self) -> List[MultiIndex]:
        return [key for key, _ in self._terms]

    def coefficient(self, exponent: Sequence[int]):
        key = tuple(exponent)
        if len(key) != self._rank:
            raise RankMismatchError(f"exponent {key} does not have rank {self._rank}")
        for stored, value in self._terms:
            if stored == key:
                return value
        return 0

    def leading_term(self) -> Tuple[MultiIndex, object]:
        if not self._terms:
            raise ValueError("the zero polynomial has no leading term")
        return self._terms[-1]

    def leading_coefficient(self):
        return self.leading_term()[1]

    def degree(self) -> int:
        """Largest total degree sum |e_i| in the support, -1 for zero."""
        if not self._terms:
            return -1
        return graded_lex_key(self._terms[-1][0])[0]

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Tuple[MultiIndex, object]]:
        return iter(self._terms)

    def __repr__(self) -> str:
        if not self._terms:
            return f"LaurentPoly({self._rank}, 0)"
        body = " + ".join(f"({value})*u^{list(key)}" for key, value in self._terms)
        return f"LaurentPoly({self._rank}, {body})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            if other == 0:
                return not self._terms
            return NotImplemented
        return self._rank == other._rank and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._rank, self._terms))

    # arithmetic
    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other._rank != self._rank:
                raise RankMismatchError(f"rank mismatch: {self._rank} != {other._rank}")
            return other
        return LaurentPoly.constant(self._rank, other)

    def __add__(self, other) -> "LaurentPoly":
        other = self._coerce(other)
        merged = dict(self._terms)
        for key, value in other._terms:
            merged[key] = merged[key] + value if key in merged else value
        return LaurentPoly(self._rank, merged)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self._rank, {key: -value for key, value in self._terms})

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            return LaurentPoly(self._rank, {key: value * other for key, value in self._terms})
        other = self._coerce(other)
        out: Dict[MultiIndex, object] = {}
        for left_key, left in self._terms:
            for right_key, right in other._terms:
                key = tuple(a + b for a, b in zip(left_key, right_key))
                value = left * right
                out[key] = out[key] + value if key in out else value
        return LaurentPoly(self._rank, out)

    def __rmul__(self, other) -> "LaurentPoly":
        return LaurentPoly(self._rank, {key: other * value for key, value in self._terms})

    def __truediv__(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            raise TypeError("use divmod_univariate for polynomial division")
        return LaurentPoly(self._rank, {key: value / other for key, value in self._terms})

    def __pow__(self, exponent: int) -> "LaurentPoly":
        if exponent < 0:
            raise ValueError("negative powers are not supported")
        result = LaurentPoly.constant(self._rank, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def map_coefficients(self, func) -> "LaurentPoly":
        return LaurentPoly(self._rank, {key: func(value) for key, value in self._terms})

    def star(self) -> "LaurentPoly":
        """p* = sum conj(c_mu) u^(-mu)."""
        return LaurentPoly(
            self._rank,
            {tuple(-e for e in key): _conjugate(value) for key, value in self._terms},
        )

    def act(self, w: SignedPermutation) -> "LaurentPoly":
        if w.rank != self._rank:
            raise RankMismatchError(f"rank mismatch: {w.rank} != {self._rank}")
        return LaurentPoly(self._rank, {w.apply(key): value for key, value in self._terms})

    def cleanup(self, tol: float) -> "LaurentPoly":
        """Drop coefficients with modulus at most ``tol``."""
        return LaurentPoly(self._rank, dict(self._terms), drop_below=tol)

    def max_abs_coefficient(self):
        return max((abs(value) for _, value in self._terms), default=0)

    def max_abs_difference(self, other: "LaurentPoly"):
        return (self - other).max_abs_coefficient()

    # evaluation
    def evaluate(self, point: Sequence) -> object:
        """Value at ``point``; a bare scalar is taken as the single coordinate."""
        if np.ndim(point) == 0:
            point = (point,)
        if len(point) != self._rank:
            raise RankMismatchError(f"point has {len(point)} coordinates, expected {self._rank}")
        if any(x == 0 for x in point):
            raise ZeroCoordinateError("Laurent polynomials cannot be evaluated at a zero coordinate")
        total = 0
        for key, value in self._terms:
            term = value
            for x, e in zip(point, key):
                term = term * x ** e
            total = total + term
        return total

    __call__ = evaluate

    def evaluate_torus(self, angles: np.ndarray) -> np.ndarray:
        """Vectorised values at u_j = exp(i * angles[:, j]); ``angles`` has shape (N, rank)."""
        angles = np.asarray(angles, dtype=float)
        if angles.ndim != 2 or angles.shape[1] != self._rank:
            raise RankMismatchError(f"angles must have shape (N, {self._rank})")
        if not self._terms:
            return np.zeros(angles.shape[0], dtype=complex)
        exponents = np.array([key for key, _ in self._terms], dtype=float)
        coefficients = np.array([complex(value) for _, value in self._terms], dtype=complex)
        return np.exp(1j * (angles @ exponents.T)) @ coefficients

    # univariate division
    def divmod_univariate(self, divisor: "LaurentPoly") -> Tuple["LaurentPoly", "LaurentPoly"]:
        """Long division in C[u^{+-1}] for rank one.

        Writes self = quotient * divisor + remainder with remainder = u^a R(u),
        where a is the lowest exponent of self and deg R is below the width
        of the divisor.
        """
        if self._rank != 1 or divisor._rank != 1:
            raise RankMismatchError("divmod_univariate needs rank-one polynomials")
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return LaurentPoly.zero(1), LaurentPoly.zero(1)
        low_f = min(key[0] for key in self.support())
        low_g = min(key[0] for key in divisor.support())
        top_g = max(key[0] for key in divisor.support())
        numer = {key[0] - low_f: value for key, value in self._terms}
        denom = {key[0] - low_g: value for key, value in divisor._terms}
        lead = denom[top_g - low_g]
        quotient: Dict[int, object] = {}
        degree = max(numer)
        while numer and degree >= top_g - low_g:
            value = numer.pop(degree, 0)
            if value != 0:
                factor = value / lead
                shift = degree - (top_g - low_g)
                quotient[shift] = factor
                for power, coefficient in denom.items():
                    if power == top_g - low_g:
                        continue
                    target = power + shift
                    numer[target] = numer.get(target, 0) - factor * coefficient
            degree -= 1
        offset = low_f - low_g
        return (
            LaurentPoly(1, {(power + offset,): value for power, value in quotient.items()}),
            LaurentPoly(1, {(power + low_f,): value for power, value in numer.items()}),
        )

    # serialisation
    def to_json(self) -> dict:
        return {
            "rank": self._rank,
            "terms": [
                {"exp": list(key), "re": float(complex(value).real), "im": float(complex(value).imag)}
                for key, value in self._terms
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LaurentPoly":
        terms = {}
        for term in data["terms"]:
            value = complex(term["re"], term["im"])
            terms[tuple(term["exp"])] = value.real if term["im"] == 0 else value
        return cls(int(data["rank"]), terms)


def _conjugate(value):
    conjugate = getattr(value, "conjugate", None)
    return conjugate() if conjugate is not None else value


def weyl_orbit(lam: Sequence[int]) -> FrozenSet[MultiIndex]:
    """The W-orbit of a partition: all signed rearrangements of its entries."""
    lam = as_partition(lam)
    orbit = set()
    for arrangement in set(permutations(lam)):
        choices = [(value, -value) if value else (0,) for value in arrangement]
        orbit.update(product(*choices))
    return frozenset(orbit)


def dominant_representative(exponent: Sequence[int]) -> Partition:
    return tuple(sorted((abs(e) for e in exponent), reverse=True))


def orbit_sum(lam: Sequence[int]) -> LaurentPoly:
    """m_lambda = sum of u^mu over the W-orbit of lambda."""
    lam = as_partition(lam)
    return LaurentPoly(len(lam), {exponent: 1 for exponent in weyl_orbit(lam)})


def is_w_invariant(p: LaurentPoly, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    for generator in SignedPermutation.generators(p.rank):
        if (p.act(generator) - p).max_abs_coefficient() > tol:
            return False
    return True


def orbit_expansion(p: LaurentPoly) -> Dict[Partition, object]:
    """Coefficients of a W-invariant polynomial in the orbit-sum basis."""
    return {key: value for key, value in p.terms if is_partition(key)}


def projective_residual(f: LaurentPoly, g: LaurentPoly) -> Tuple[object, float]:
    """Scale g onto f by matching leading coefficients.

    Returns ``(scale, residual)`` with residual = max|f - scale*g| / max|f|.
    """
    if f.rank != g.rank:
        raise RankMismatchError(f"rank mismatch: {f.rank} != {g.rank}")
    if f.is_zero() or g.is_zero():
        raise ValueError("projective comparison needs nonzero polynomials")
    key, value = f.leading_term()
    reference = g.coefficient(key)
    if reference == 0:
        return 0, float("inf")
    scale = value / reference
    residual = (f - g * scale).max_abs_coefficient() / f.max_abs_coefficient()
    return scale, float(residual)

