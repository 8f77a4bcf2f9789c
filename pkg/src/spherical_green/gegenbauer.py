"""Gegenbauer polynomials in the normalization P_0 = 1, P_1 = 2 lam x.

Exact coefficients come from the three-term recurrence; the Rodrigues formula
is kept as an independent cross-check for half-integer ``lam``.  Floating
evaluation and Gauss quadrature for the weight ``(1-x^2)^(lam-1/2)`` run on
the kernels in :mod:`spherical_green.kernels`.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import ConvergenceError, DomainError
from .exact import RationalPoly, as_rational, one_minus_x2, poly_derivative
from .special import gamma_ratio


def _check_lambda(lam):
    lam = as_rational(lam)
    if lam <= Fraction(-1, 2):
        raise DomainError(f"lambda must exceed -1/2, got {lam}")
    if lam == 0:
        raise DomainError("lambda = 0 is the degenerate Chebyshev limit; not supported")
    return lam


def gegenbauer_poly(lam, k):
    """Exact ``P^lam_k`` from the three-term recurrence."""
    return gegenbauer_polys(lam, k)[k]


def _check_lambda_float(lam):
    lam = float(lam)
    if lam <= -0.5 or lam == 0.0:
        raise DomainError(f"lambda must exceed -1/2 and be nonzero, got {lam!r}")
    return lam


def gegenbauer_polys(lam, kmax):
    lam = _check_lambda(lam)
    if kmax < 0:
        raise DomainError("degree must be >= 0")
    x = RationalPoly.x()
    polys = [RationalPoly((1,))]
    if kmax >= 1:
        polys.append(x.scale(2 * lam))
    for k in range(2, kmax + 1):
        nxt = (x * polys[k - 1]).scale(Fraction(2 * (k + lam - 1), k)) - polys[k - 2].scale(
            Fraction(k + 2 * lam - 2, k)
        )
        polys.append(nxt)
    return polys


def rodrigues_poly(lam, k):
    """``P^lam_k`` from the Rodrigues formula, exact when ``lam - 1/2`` is a nonneg integer.

    The prefactor ``(-2)^k / k! * (lam)_k / (k + 2 lam)_k`` converts the bare
    derivative into the recurrence normalization.
    """
    lam = _check_lambda(lam)
    p = lam - Fraction(1, 2)
    if p.denominator != 1 or p < 0:
        raise DomainError("Rodrigues cross-check needs lam - 1/2 in {0, 1, 2, ...}")
    p = int(p)
    prefactor = Fraction((-2) ** k, math.factorial(k))
    for i in range(k):
        prefactor *= (lam + i) / (k + 2 * lam + i)
    bare = poly_derivative(one_minus_x2(k + p), k)
    return bare.exact_div(one_minus_x2(p)).scale(prefactor)


def gegenbauer_norm_sq(lam, k):
    """``int (P^lam_k)^2 (1-x^2)^(lam-1/2) dx`` in closed form."""
    lam = _check_lambda_float(lam)
    return 2.0 ** (1 - 2 * lam) * math.pi * gamma_ratio([k + 2 * lam], [lam, lam, k + 1]) / (k + lam)


def gegenbauer_at_one(lam, k):
    """``P^lam_k(1) = Gamma(k + 2 lam) / (Gamma(2 lam) k!)``."""
    lam = _check_lambda_float(lam)
    return gamma_ratio([k + 2 * lam], [2 * lam, k + 1])


def weight_mass(lam):
    """``int (1-x^2)^(lam-1/2) dx = sqrt(pi) Gamma(lam+1/2) / Gamma(lam+1)``."""
    lam = _check_lambda_float(lam)
    return math.sqrt(math.pi) * gamma_ratio([lam + 0.5], [lam + 1.0])


def gegenbauer_eval(lam, k, x):
    """Floating ``P^lam_k(x)`` on an array."""
    x = np.asarray(x, dtype=float)
    return kernels.gegenbauer_table(float(lam), k, x.ravel())[k].reshape(x.shape)


@dataclass(frozen=True)
class GegenbauerBasis:
    lam: Fraction
    max_degree: int
    polys: tuple = field(repr=False)

    @classmethod
    def build(cls, lam, max_degree):
        lam = _check_lambda(lam)
        return cls(lam, max_degree, tuple(gegenbauer_polys(lam, max_degree)))

    @classmethod
    def for_sphere(cls, n, max_degree):
        return cls.build(Fraction(n - 1, 2), max_degree)

    def __getitem__(self, k):
        return self.polys[k]

    def norm_sq(self, k):
        return gegenbauer_norm_sq(self.lam, k)

    def values(self, x):
        """Table of floating values, shape ``(max_degree+1, len(x))``."""
        return kernels.gegenbauer_table(float(self.lam), self.max_degree, np.ravel(x))


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f):
        """``sum w_i f(x_i)`` with compensated summation."""
        return kernels.compensated_sum(self.weights * f(self.nodes))


def gauss_jacobi_rule(lam, count, tol=1e-15, maxiter=100):
    """Gauss rule for the symmetric weight ``(1-x^2)^(lam-1/2)``.

    Nodes are the zeros of ``P^lam_count``; weights follow from the
    Christoffel formula ``w_i = (k_N/k_{N-1}) h_{N-1} / (P_N'(x_i) P_{N-1}(x_i))``
    with ``k_N`` the leading coefficient and ``h_{N-1}`` the squared norm.

    Raises
    ------
    ConvergenceError
        If Newton iteration fails; the message names the offending node.
    """
    lf = _check_lambda_float(lam)
    if count < 1:
        raise DomainError("count must be >= 1")
    nodes, bad = kernels.gegenbauer_nodes(lf, count, tol=tol, maxiter=maxiter)
    if bad >= 0:
        raise ConvergenceError(f"Gauss node {bad} of {count} did not converge (lambda={lam})")
    order = np.argsort(nodes)
    nodes = nodes[order]
    p, dp, pm1 = kernels.gegenbauer_value_deriv(lf, count, nodes)
    lead_ratio = 2.0 * (lf + count - 1) / count
    weights = lead_ratio * gegenbauer_norm_sq(lam, count - 1) / (dp * pm1)
    return QuadratureRule(nodes, weights)
