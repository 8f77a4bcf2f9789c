import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from spherical_green.axial import (
    axial_eigenvalue,
    axial_Pn,
    axial_reports,
    eigen_identity_defect,
    flat_radial_identity,
    meanfield_residual,
    u_k_family,
    verify_eigenvalue,
    verify_orthogonality,
)
from spherical_green.errors import DomainError
from spherical_green.exact import RationalPoly
from spherical_green.gegenbauer import gegenbauer_poly

EVEN = (2, 4, 6, 8)
X = sympy.Symbol("x")


def poly(*coeffs):
    return RationalPoly(coeffs)


def to_sympy(p):
    return sum(sympy.Rational(c.numerator, c.denominator) * X**i for i, c in enumerate(p.coeffs))


def test_axial_examples():
    assert axial_Pn(poly(0, 1), 2) == poly(0, 2)
    assert axial_Pn(poly(0, 0, 1), 2) == poly(-2, 0, 6)
    for n in EVEN:
        assert axial_Pn(poly(5), n).is_zero()


def test_u_k_examples():
    assert u_k_family(2, 0) == poly(1)
    assert u_k_family(2, 1) == poly(0, -2)
    assert u_k_family(4, 1) == poly(0, -4)


@pytest.mark.parametrize("n", EVEN)
def test_u_k_against_sympy(n):
    p = (n - 2) // 2
    for k in range(6):
        ref = sympy.cancel(sympy.diff((1 - X**2) ** (k + p), X, k) / (1 - X**2) ** p)
        assert sympy.expand(to_sympy(u_k_family(n, k)) - ref) == 0


@pytest.mark.parametrize("n", EVEN)
def test_u_k_is_a_multiple_of_gegenbauer(n):
    lam = Fraction(n - 1, 2)
    for k in range(7):
        u = u_k_family(n, k)
        g = gegenbauer_poly(lam, k)
        assert u.degree == k
        assert u == g.scale(u.lead() / g.lead())


def test_odd_dimension_rejected():
    with pytest.raises(DomainError):
        axial_Pn(poly(1), 3)
    with pytest.raises(DomainError):
        u_k_family(5, 1)


@pytest.mark.parametrize("n, k, l", [(2, 1, 2), (4, 3, 1), (6, 2, 5)])
def test_orthogonality_examples(n, k, l):
    assert verify_orthogonality(n, k, l) == 0


@pytest.mark.parametrize("n", EVEN)
def test_orthogonality_grid(n):
    for k in range(9):
        for l in range(9):
            if k != l:
                v = verify_orthogonality(n, k, l)
                assert isinstance(v, Fraction) and v == 0


def test_orthogonality_needs_distinct_degrees():
    with pytest.raises(DomainError):
        verify_orthogonality(2, 3, 3)


def test_eigenvalue_examples():
    assert verify_eigenvalue(2, 1) == (Fraction(-2), Fraction(-2))
    # (-1) Gamma(4)/Gamma(2) = -6
    assert verify_eigenvalue(2, 2) == (Fraction(-6), Fraction(-6))
    assert verify_eigenvalue(4, 1) == (Fraction(24), Fraction(24))


@pytest.mark.parametrize("n", EVEN)
def test_eigenvalue_grid(n):
    for k in range(1, 9):
        computed, expected = verify_eigenvalue(n, k)
        assert computed == expected
        assert expected == (-1) ** (n // 2) * Fraction(math.gamma(k + n)) / Fraction(math.gamma(k))


@pytest.mark.parametrize("n", [2, 4])
def test_eigenvalue_against_sympy_integrals(n):
    w = (1 - X**2) ** ((n - 2) // 2)
    sign = (-1) ** (n // 2)
    for k in range(1, 5):
        u = to_sympy(u_k_family(n, k))
        q = sign * to_sympy(axial_Pn(u_k_family(n, k), n))
        ratio = sympy.integrate(q * u * w, (X, -1, 1)) / sympy.integrate(u * u * w, (X, -1, 1))
        assert Fraction(int(ratio.p), int(ratio.q)) == axial_eigenvalue(n, k)


@pytest.mark.parametrize("n", EVEN)
def test_eigen_identity_coefficientwise(n):
    for k in range(9):
        assert eigen_identity_defect(n, k).is_zero()


@pytest.mark.parametrize("n", EVEN)
def test_flat_radial_identity_vanishes(n):
    assert flat_radial_identity(n).is_zero()


def test_flat_radial_identity_against_sympy():
    r = sympy.Symbol("r", positive=True)
    for n in (2, 4):
        F = sympy.log(1 + r**2)
        for _ in range(n // 2):
            F = -(sympy.diff(F, r, 2) + (n - 1) * sympy.diff(F, r) / r)
        target = -math.factorial(n - 1) * (2 / (1 + r**2)) ** n
        assert sympy.simplify(F - target) == 0


def test_meanfield_examples():
    assert np.all(meanfield_residual(poly(0), 4, [0.1, -0.3, 0.7]) == 0)
    vals = meanfield_residual(poly(0, 1), 2, [0.0, 0.5])
    assert vals[0] == 0
    assert vals[1] == pytest.approx(1 / 3 - (math.e - 1), rel=1e-14)
    assert meanfield_residual(poly(0, 0, 1), 2, [0.0])[0] == pytest.approx(-2 / 3, rel=1e-15)


small = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=1, max_size=7)


@given(small, small, st.fractions(max_denominator=5), st.fractions(max_denominator=5), st.sampled_from(EVEN))
def test_linearity(a, b, alpha, beta, n):
    u, v = RationalPoly(a), RationalPoly(b)
    lhs = axial_Pn(u.scale(alpha) + v.scale(beta), n)
    assert lhs == axial_Pn(u, n).scale(alpha) + axial_Pn(v, n).scale(beta)


@given(small, st.sampled_from(EVEN))
def test_degree_law(a, n):
    u = RationalPoly(a)
    out = axial_Pn(u, n)
    assert out.is_zero() or out.degree <= u.degree


def test_axial_reports_all_pass():
    reps = axial_reports(4, 4)
    assert reps and all(r.passed and r.is_exact for r in reps)
