"""The critical operator on axially symmetric functions of S^n, n even.

A function of the last coordinate ``x = x_{n+1}`` only is handled as a
rational polynomial in ``x``.  On such functions the operator reduces to
``P_n u = (-1)^(n/2) [(1-x^2)^(n/2) u']^(n-1)``, which is checked here
against the eigenfamily ``u_k`` in exact rational arithmetic.
"""

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .exact import (
    RationalFn,
    RationalPoly,
    integrate_weighted,
    one_minus_x2,
    poly_derivative,
    radial_laplacian,
)
from .reports import ResidualReport

AxialFunction = RationalPoly


def _check_even(n):
    if n < 2 or n % 2:
        raise DomainError(f"the axial formula needs an even dimension n >= 2, got {n}")


def axial_Q(u, n):
    """``[(1-x^2)^(n/2) u']^(n-1)`` without the sign."""
    _check_even(n)
    return poly_derivative(one_minus_x2(n // 2) * poly_derivative(u), n - 1)


def axial_Pn(u, n):
    """``P_n u = (-1)^(n/2) [(1-x^2)^(n/2) u']^(n-1)``."""
    q = axial_Q(u, n)
    return -q if (n // 2) % 2 else q


def u_k_family(n, k):
    """``(1-x^2)^(-(n-2)/2) d^k/dx^k (1-x^2)^(k+(n-2)/2)``; the division is asserted exact."""
    _check_even(n)
    if k < 0:
        raise DomainError("k must be >= 0")
    p = (n - 2) // 2
    return poly_derivative(one_minus_x2(k + p), k).exact_div(one_minus_x2(p))


def axial_eigenvalue(n, k):
    """``(-1)^(n/2) (k+n-1)! / (k-1)!`` as an exact integer (the eigenvalue of the unsigned operator)."""
    _check_even(n)
    if k < 1:
        raise DomainError("k must be >= 1")
    val = math.factorial(k + n - 1) // math.factorial(k - 1)
    return Fraction(-val if (n // 2) % 2 else val)


def verify_orthogonality(n, k, l):
    """Exact ``int Q u_k u_l (1-x^2)^((n-2)/2) dx`` for ``k != l``; always 0."""
    if k == l:
        raise DomainError("orthogonality needs distinct degrees")
    uk, ul = u_k_family(n, k), u_k_family(n, l)
    return integrate_weighted(axial_Q(uk, n) * ul, (n - 2) // 2)


def verify_eigenvalue(n, k):
    """``(computed, expected)`` with computed the exact Rayleigh quotient of ``Q`` on ``u_k``."""
    uk = u_k_family(n, k)
    p = (n - 2) // 2
    computed = integrate_weighted(axial_Q(uk, n) * uk, p) / integrate_weighted(uk * uk, p)
    return computed, axial_eigenvalue(n, k)


def eigen_identity_defect(n, k):
    """``P_n u_k - |eigenvalue| u_k`` as a polynomial; the zero polynomial when the identity holds."""
    uk = u_k_family(n, k)
    mult = abs(axial_eigenvalue(n, k)) if k >= 1 else Fraction(0)
    return axial_Pn(uk, n) - uk.scale(mult)


def flat_radial_identity(n):
    """``(-Delta)^(n/2) log(1+r^2) + (n-1)! 2^n / (1+r^2)^n`` in R^n, as a rational function.

    The logarithm is differentiated once by hand, ``d/dr log(1+r^2) = 2r/(1+r^2)``,
    so the first Laplacian is ``F'' + (n-1) F'/r`` formed from that derivative
    and every later iterate stays rational.
    """
    _check_even(n)
    r = RationalPoly.x()
    one_plus = RationalPoly((1, 0, 1))
    dF = RationalFn(r.scale(2), one_plus)
    lap = dF.derivative() + dF * (n - 1) / RationalFn(r)
    for _ in range(n // 2 - 1):
        lap = radial_laplacian(lap, n)
    signed = -lap if (n // 2) % 2 else lap
    target = RationalFn(RationalPoly.const(-math.factorial(n - 1) * 2**n), one_plus**n)
    return signed - target


def meanfield_residual(u, n, xs):
    """``P_n u / (n+1) - (n-1)! (exp(n u) - 1)`` at each sample point."""
    pu = axial_Pn(u, n)
    xs = np.asarray(xs, dtype=float)
    pv = np.array([pu(float(x)) for x in xs.ravel()]).reshape(xs.shape)
    uv = np.array([u(float(x)) for x in xs.ravel()]).reshape(xs.shape)
    return pv / (n + 1) - math.factorial(n - 1) * np.expm1(n * uv)


def axial_reports(n, kmax):
    """Exact reports for orthogonality, eigenvalues and the polynomial eigen-identity."""
    out = []
    for k in range(kmax + 1):
        for l in range(kmax + 1):
            if k != l:
                out.append(ResidualReport.exact("axial_orthogonality", verify_orthogonality(n, k, l), 0, n=n, k=k, l=l))
    for k in range(1, kmax + 1):
        computed, expected = verify_eigenvalue(n, k)
        out.append(ResidualReport.exact("axial_eigenvalue", computed, expected, n=n, k=k))
    for k in range(kmax + 1):
        defect = eigen_identity_defect(n, k)
        out.append(
            ResidualReport.exact(
                "axial_eigen_identity", Fraction(int(not defect.is_zero())), 0, n=n, k=k
            )
        )
    return out
