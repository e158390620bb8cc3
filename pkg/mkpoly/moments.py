"""
Rank-one Askey-Wilson functional from its closed-form moments.

For the basis phi_k(u) = (a u, a/u; q)_k the normalised functional is

    h(phi_k) = (ab, ac, ad; q)_k / (abcd; q)_k,

so h of any symmetric Laurent polynomial follows from a triangular change
of basis. No contour is involved, which makes this the pairing of choice
when the couplings leave the unit disc. The reduction cancels terms of size
q^(-k^2/2), so it runs in mpmath at ``WORKING_BITS`` regardless of the
caller's precision.
"""
import logging
from typing import Dict, List

import mpmath
import numpy as np

from .qseries import qpoch_finite
from .symlaurent import LaurentPoly, RankMismatchError, is_w_invariant
from .torus_measure import MKParams

logger = logging.getLogger(__name__)

WORKING_BITS = 256
SYMMETRY_TOL = 1e-12
DEGENERATE_TOL = 1e-30


class DegenerateMoments(ArithmeticError):
    """The moment formula has a vanishing denominator or no usable anchor."""


class AskeyWilsonMoments:
    """Normalised functional h on symmetric C[u^{+-1}], rank one only.

    The anchor coupling is the one of largest modulus; the moment formula is
    symmetric in the four couplings, so the choice only affects conditioning.
    """

    positive = False
    route = "moments"

    def __init__(self, params: MKParams, bits: int = WORKING_BITS):
        self.params = params
        self.bits = bits
        couplings = list(params.couplings)
        anchor_index = max(range(4), key=lambda i: abs(couplings[i]))
        if couplings[anchor_index] == 0:
            raise DegenerateMoments("all four couplings vanish")
        self.anchor = couplings[anchor_index]
        self.others = couplings[:anchor_index] + couplings[anchor_index + 1:]
        self._phi: List[Dict[int, object]] = []
        self._moments: List[object] = []

    def _mp(self, value):
        return mpmath.mpmathify(complex(value)) if isinstance(value, complex) else mpmath.mpf(value)

    def _extend(self, degree: int) -> None:
        """Cache phi_k coefficients and h(phi_k) for k <= degree."""
        with mpmath.workprec(self.bits):
            a = self._mp(self.anchor)
            q = self._mp(self.params.q)
            b, c, d = (self._mp(v) for v in self.others)
            while len(self._phi) <= degree:
                k = len(self._phi)
                u = LaurentPoly.variable(1, 0)
                phi = LaurentPoly.constant(1) * qpoch_finite(u * a, q, k)
                phi = phi * qpoch_finite(LaurentPoly.variable(1, 0, -1) * a, q, k)
                denominator = qpoch_finite(a * b * c * d, q, k)
                if abs(denominator) < DEGENERATE_TOL:
                    raise DegenerateMoments(f"(abcd; q)_{k} vanishes")
                numerator = qpoch_finite(a * b, q, k) * qpoch_finite(a * c, q, k) * qpoch_finite(a * d, q, k)
                self._phi.append({key[0]: value for key, value in phi.terms})
                self._moments.append(numerator / denominator)

    def expectation(self, f: LaurentPoly, raw: bool = False) -> complex:
        if raw:
            raise ValueError("the moment functional has no unnormalised form")
        if f.rank != 1:
            raise RankMismatchError("the moment functional is defined at rank one only")
        if f.is_zero():
            return 0j
        scale = float(f.max_abs_coefficient())
        if not is_w_invariant(f, tol=SYMMETRY_TOL * scale):
            raise ValueError("the moment functional needs a u <-> 1/u symmetric polynomial")
        degree = max(abs(key[0]) for key in f.support())
        self._extend(degree)
        with mpmath.workprec(self.bits):
            remainder = {key[0]: self._mp(value) for key, value in f.terms}
            total = mpmath.mpf(0)
            for k in range(degree, 0, -1):
                top = remainder.get(k, 0)
                if top == 0:
                    continue
                factor = top / self._phi[k][k]
                for power, value in self._phi[k].items():
                    remainder[power] = remainder.get(power, 0) - factor * value
                total += factor * self._moments[k]
            total += remainder.get(0, 0)
            return complex(total)

    def pairing(self, p: LaurentPoly, r: LaurentPoly) -> complex:
        return self.expectation(r.star() * p)

    def gram(self, basis: List[LaurentPoly]) -> np.ndarray:
        """G[i, j] = <basis_i, basis_j>."""
        size = len(basis)
        out = np.zeros((size, size), dtype=complex)
        for i in range(size):
            for j in range(i, size):
                out[i, j] = self.pairing(basis[i], basis[j])
                out[j, i] = np.conj(out[i, j])
        return out
