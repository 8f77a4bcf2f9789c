"""Extrinsic geometry of graph hypersurfaces and the residual identities
that single out round spheres.

Conventions: upward unit normal, ``H`` is the trace of the second
fundamental form (the sum of the principal curvatures, not their mean),
``rho = |x|^2 + f^2`` is the squared chord to the base point and
``eta = (f - x.grad f) / sqrt(1 + |grad f|^2)`` is the support function.
"""

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError
from .exact import as_rational
from .reports import ResidualReport


@dataclass(frozen=True)
class CurvatureData:
    metric: np.ndarray
    inverse_metric: np.ndarray
    second_form: np.ndarray
    mean_curvature: float
    second_form_norm_sq: float
    scalar: float
    eta: float
    rho: float
    kappas: np.ndarray


def curvature_at(S, x):
    """First and second fundamental forms and derived scalars at ``x``."""
    x = np.asarray(x, dtype=float)
    d = S.at(x)
    grad, hess = d.grad, d.hess
    w2 = 1.0 + grad @ grad
    w = math.sqrt(w2)
    g = np.eye(S.dim) + np.outer(grad, grad)
    ginv = np.eye(S.dim) - np.outer(grad, grad) / w2
    h = hess / w
    shape = ginv @ h
    H = float(np.trace(shape))
    norm_sq = float(np.trace(shape @ shape))
    kappas = scipy.linalg.eigh(h, g, eigvals_only=True)
    eta = (d.f - x @ grad) / w
    rho = x @ x + d.f**2
    return CurvatureData(g, ginv, h, H, norm_sq, H * H - norm_sq, float(eta), float(rho), kappas)


def _rho_grad(x, d):
    return 2.0 * x + 2.0 * d.f * d.grad


def _rho_hess(x, d):
    n = x.shape[0]
    return 2.0 * np.eye(n) + 2.0 * np.outer(d.grad, d.grad) + 2.0 * d.f * d.hess


def _christoffel(d):
    """``Gamma^c_{ab} = f_c f_ab / (1 + |grad f|^2)``, indexed ``[c, a, b]``."""
    return np.einsum("c,ab->cab", d.grad, d.hess) / (1.0 + d.grad @ d.grad)


def _fd_rho_derivs(S, x, h):
    """Fourth-order central differences of rho; returns (gradient, Hessian)."""
    n = x.shape[0]
    eye = np.eye(n)

    def rho(p):
        d = S.derivs(p)
        return np.einsum("mi,mi->m", p, p) + d.f**2

    c1 = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * h)
    offs = np.array([-2.0, -1.0, 1.0, 2.0])
    grad = np.empty(n)
    hess = np.empty((n, n))
    for a in range(n):
        pts = x[None, :] + (offs * h)[:, None] * eye[a][None, :]
        grad[a] = c1 @ rho(pts)
        for b in range(a, n):
            if a == b:
                o = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
                pts = x[None, :] + (o * h)[:, None] * eye[a][None, :]
                c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
                hess[a, a] = c2 @ rho(pts)
            else:
                # tensor product of the first-derivative stencil
                pa, pb = np.meshgrid(offs * h, offs * h, indexing="ij")
                pts = x[None, :] + pa.reshape(-1, 1) * eye[a] + pb.reshape(-1, 1) * eye[b]
                vals = rho(pts).reshape(4, 4)
                hess[a, b] = hess[b, a] = c1 @ vals @ c1
    return grad, hess


def identity_residuals(S, x, fd_step=1e-3, tol=1e-10, fd_tol=1e-8):
    """Residuals of ``|grad rho|_g^2 = 4 rho - 4 eta^2`` and ``Delta_g rho = 2n + 2 eta H``.

    The Laplacian is formed twice: from the analytic Hessian of rho with the
    graph Christoffel symbols (the reported value), and from finite
    differences of rho values (``fd_residual``, held to ``fd_tol``).  Both
    must pass.
    """
    x = np.asarray(x, dtype=float)
    cd = curvature_at(S, x)
    d = S.at(x)
    n = S.dim
    drho = _rho_grad(x, d)
    r1 = drho @ cd.inverse_metric @ drho - (4.0 * cd.rho - 4.0 * cd.eta**2)
    target = 2.0 * n + 2.0 * cd.eta * cd.mean_curvature
    gam = _christoffel(d)
    cov = _rho_hess(x, d) - np.einsum("cab,c->ab", gam, drho)
    lap_analytic = float(np.sum(cd.inverse_metric * cov))
    tensor_defect = float(np.max(np.abs(cov - (2.0 * cd.metric + 2.0 * cd.eta * cd.second_form))))
    fd_grad, fd_hess = _fd_rho_derivs(S, x, fd_step)
    cov_fd = fd_hess - np.einsum("cab,c->ab", gam, fd_grad)
    fd_residual = float(np.sum(cd.inverse_metric * cov_fd)) - target
    meta = {"surface": S.name, "x": x.tolist()}
    lap = ResidualReport.check(
        "laplace_rho_identity",
        lap_analytic - target,
        0.0,
        tol,
        fd_residual=fd_residual,
        fd_tolerance=fd_tol,
        hessian_tensor_defect=tensor_defect,
        **meta,
    )
    if lap.passed and not abs(fd_residual) <= fd_tol:
        lap = dataclasses.replace(lap, passed=False)
    return ResidualReport.check("grad_rho_identity", r1, 0.0, tol, **meta), lap


def _nonzero_point(x):
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise DomainError("the residual is singular at the base point x = 0")
    return x


def green_residual_surface(S, x, c):
    """``2 eta H / rho + 4 eta^2 / rho^2 + c`` on a surface in R^3."""
    if S.dim != 2:
        raise DomainError("the surface residual needs a 2-dimensional graph")
    cd = curvature_at(S, _nonzero_point(x))
    return 2.0 * cd.eta * cd.mean_curvature / cd.rho + 4.0 * cd.eta**2 / cd.rho**2 + c


def green_residual_conformal(S, x):
    """``n eta^2 / rho^2 + eta H / rho + (H^2 - |II|^2) / (4(n-1))`` for n >= 3."""
    n = S.dim
    if n < 3:
        raise DomainError("the conformal residual needs n >= 3")
    cd = curvature_at(S, _nonzero_point(x))
    return n * cd.eta**2 / cd.rho**2 + cd.eta * cd.mean_curvature / cd.rho + cd.scalar / (4.0 * (n - 1))


# --------------------------------------------------------------------------
# limits along rays from the base point


@dataclass(frozen=True)
class RayLimits:
    values: tuple
    targets: tuple
    errors: tuple

    @property
    def residual(self):
        return max(abs(v - t) for v, t in zip(self.values, self.targets))


def _ray_quantities(S, pts):
    d = S.derivs(pts)
    grad = d.grad
    w2 = 1.0 + np.einsum("mi,mi->m", grad, grad)
    ginv = np.eye(S.dim)[None] - np.einsum("mi,mj->mij", grad, grad) / w2[:, None, None]
    rho = np.einsum("mi,mi->m", pts, pts) + d.f**2
    eta = (d.f - np.einsum("mi,mi->m", pts, grad)) / np.sqrt(w2)
    drho = 2.0 * pts + 2.0 * d.f[:, None] * grad
    dpsi = -np.einsum("mb,mab->ma", pts, d.hess)
    q1 = eta / rho
    q2 = np.einsum("ma,mab,mb->m", drho, ginv, dpsi) / rho
    q3 = np.einsum("ma,mab,mb->m", dpsi, ginv, dpsi) / rho
    return np.stack([q1, q2, q3], axis=1)


def neville_zero(ts, vals):
    """Polynomial extrapolation to ``t = 0``; returns (estimate, last correction)."""
    ts = np.asarray(ts, dtype=float)
    p = np.array(vals, dtype=float)
    m = len(ts)
    prev = p[-1]
    best = p[0]
    for level in range(1, m):
        p = (ts[level:, None] * p[:-1] - ts[: m - level, None] * p[1:]) / (ts[level:, None] - ts[: m - level, None]) if p.ndim > 1 else (ts[level:] * p[:-1] - ts[: m - level] * p[1:]) / (ts[level:] - ts[: m - level])
        prev, best = best, p[-1]
    return best, np.abs(best - prev)


def ray_limits(S, v, t0=1e-2, levels=6, tol=1e-4):
    """Limits at t -> 0 along ``t -> (t v, f(t v))`` with their closed-form targets.

    Returns the extrapolated ``(eta/rho, <grad rho, grad psi>_g/rho,
    |grad psi|_g^2/rho)`` with ``psi = f - x.grad f``, together with
    ``(-II(v,v)/2, -2 II(v,v), II^2(v,v))`` read off the Hessian at 0.
    """
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise DomainError("direction must be a unit vector")
    ts = t0 * 0.5 ** np.arange(levels)
    q = _ray_quantities(S, ts[:, None] * v[None, :])
    est, err = neville_zero(ts, q)
    if np.any(err > tol * np.maximum(1.0, np.abs(est))):
        raise ConvergenceError(f"ray extrapolation did not settle (corrections {err})")
    hess0 = S.hessian_at_base()
    iivv = float(v @ hess0 @ v)
    ii2vv = float(v @ hess0 @ hess0 @ v)
    return RayLimits(tuple(map(float, est)), (-0.5 * iivv, -2.0 * iivv, ii2vv), tuple(map(float, err)))


# --------------------------------------------------------------------------
# algebraic identities in the principal curvatures


def _kappas(kappas, n=None):
    k = np.asarray(kappas, dtype=float)
    if n is not None and k.shape[0] != n:
        raise DomainError(f"expected {n} principal curvatures, got {k.shape[0]}")
    return k, float(k.sum()), float(k @ k)


def _direction(k, direction):
    """Principal curvature in the given direction (1-based index)."""
    if not 1 <= direction <= k.shape[0]:
        raise DomainError(f"direction index must be in 1..{k.shape[0]}")
    return float(k[direction - 1])


def umbilic_defect(kappas):
    """``H^2 - n |II|^2``; zero exactly when all principal curvatures agree."""
    k, H, s2 = _kappas(kappas)
    return H * H - k.shape[0] * s2


def paneitz_trace_residual(n, kappas):
    """``2(n-1)|II|^2 - (3n-8)/(n-2) H^2 + (n^2-2n-4)/((n-1)(n-2)) R`` with ``R = H^2 - |II|^2``."""
    if n == 4:
        raise DomainError("n = 4 is the critical case; use paneitz_trace_residual_4d")
    if n < 3:
        raise DomainError("the trace identity needs n >= 3")
    _, H, s2 = _kappas(kappas, n)
    R = H * H - s2
    return 2.0 * (n - 1) * s2 - (3 * n - 8) / (n - 2) * H * H + (n * n - 2 * n - 4) / ((n - 1) * (n - 2)) * R


def paneitz_trace_residual_4d(kappas):
    """``-24 |II|^2 + 8 H^2 - (8/3) R`` in dimension 4."""
    k, H, s2 = _kappas(kappas, 4)
    if all(isinstance(c, (int, Fraction)) for c in kappas):
        kk = [Fraction(c) for c in kappas]
        He, s2e = sum(kk), sum(c * c for c in kk)
        return -24 * s2e + 8 * He * He - Fraction(8, 3) * (He * He - s2e)
    R = H * H - s2
    return -24.0 * s2 + 8.0 * H * H - 8.0 / 3.0 * R


def paneitz_direction_residual(n, kappas, direction):
    """Per-direction identity before tracing, in the principal frame.

    ``Ric(v,v) = H II(v,v) - II^2(v,v)`` by the Gauss equation.  For n = 4 the
    critical-dimension form ``-32 II^2 + 8 II^2(v,v) + 16 H II - 2 H^2 + (4/3) R - 8 Ric``
    is used.
    """
    k, H, s2 = _kappas(kappas, n)
    kv = _direction(k, direction)
    R = H * H - s2
    ric = H * kv - kv * kv
    if n == 4:
        return -32.0 * kv * kv + 8.0 * kv * kv + 16.0 * H * kv - 2.0 * H * H + 4.0 / 3.0 * R - 8.0 * ric
    if n < 3:
        raise DomainError("the direction identity needs n >= 3")
    return (
        2.0 * n * kv * kv
        - 2.0 * kv * kv
        - 4.0 * H * kv
        + H * H / (n - 2)
        + (n - 6) / ((n - 1) * (n - 2)) * R
        + 4.0 / (n - 2) * ric
    )


def chord_coefficient_identity(n, kappas, direction):
    """``(n-2) II(v,v)^2 - 2 Ric(v,v) + R/(n-1)``; vanishes on umbilic data."""
    if n < 5:
        raise DomainError("the chord coefficient identity is stated for n >= 5")
    k, H, s2 = _kappas(kappas, n)
    kv = _direction(k, direction)
    R = H * H - s2
    ric = H * kv - kv * kv
    return (n - 2) * kv * kv - 2.0 * ric + R / (n - 1)


# --------------------------------------------------------------------------
# rotationally symmetric power-series rigidity


class QuadExt:
    """Elements ``p + q sqrt(d)`` of Q(sqrt d) for a fixed non-square rational d."""

    __slots__ = ("p", "q", "d")

    def __init__(self, p, q, d):
        self.p, self.q, self.d = Fraction(p), Fraction(q), Fraction(d)

    def _lift(self, other):
        if isinstance(other, QuadExt):
            return other
        return QuadExt(other, 0, self.d)

    def __add__(self, other):
        o = self._lift(other)
        return QuadExt(self.p + o.p, self.q + o.q, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.p, -self.q, self.d)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return QuadExt(self.p * o.p + self.q * o.q * self.d, self.p * o.q + self.q * o.p, self.d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        norm = o.p * o.p - o.q * o.q * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        return self * QuadExt(o.p / norm, -o.q / norm, self.d)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __eq__(self, other):
        o = self._lift(other) if not isinstance(other, QuadExt) else other
        return self.p == o.p and self.q == o.q

    def __hash__(self):
        return hash((self.p, self.q, self.d))

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(self.d)

    def __repr__(self):
        return f"{self.p} + {self.q}*sqrt({self.d})"

    def is_zero(self):
        return self.p == 0 and self.q == 0


def rational_sqrt(c):
    """Exact square root of a rational, or None when it is irrational."""
    c = Fraction(c)
    if c < 0:
        return None
    a, b = isqrt(c.numerator), isqrt(c.denominator)
    if a * a == c.numerator and b * b == c.denominator:
        return Fraction(a, b)
    return None


def _blocks(a, n):
    """Coefficient blocks ``A_m, B_m, C_m, D_m`` for m = 0..n; ``a[j]`` is the t^j coefficient."""
    A = [1] + [sum((a[k] * a[m + 1 - k] for k in range(1, m + 1)), 0 * a[1]) for m in range(1, n + 1)]
    B = [(2 * m + 1) * a[m + 1] for m in range(n + 1)]
    C = [a[1]]
    for m in range(1, n + 1):
        cubic = 0 * a[1]
        for k in range(m):
            for l in range(m - k):
                p = m - 1 - k - l
                cubic = cubic + 2 * (k + 1) * (l + 1) * (p + 1) * a[k + 1] * a[l + 1] * a[p + 1]
        C.append((m + 1) ** 2 * a[m + 1] + cubic)
    # 1 + 4 t f'^2: the factor 4 belongs in every D_m with m >= 1
    D = [1] + [
        4 * sum(((k + 1) * (m - k) * a[k + 1] * a[m - k] for k in range(m)), 0 * a[1]) for m in range(1, n + 1)
    ]
    return A, B, C, D


def _order_equation(a, n, c0):
    """Coefficient of t^n in ``-2 ABC + BBD + c0 AADD``."""
    A, B, C, D = _blocks(a, n)
    total = 0 * a[1]
    for n1 in range(n + 1):
        for n2 in range(n + 1 - n1):
            n3 = n - n1 - n2
            total = total - 2 * A[n1] * B[n2] * C[n3] + B[n1] * B[n2] * D[n3]
            for n4 in range(n3 + 1):
                total = total + c0 * A[n1] * A[n2] * D[n4] * D[n3 - n4]
    return total


def series_rigidity_solve(c0, N):
    """Taylor coefficients ``a_1..a_N`` of the rotationally symmetric solution in ``t = |x|^2``.

    ``a_1 = +sqrt(c0)`` and each later coefficient solves the linear step
    ``-2 (n+1)^2 a_1 a_{n+1} = Phi_n(a_1, ..., a_n)``; ``Phi_n`` is the order-n
    equation evaluated with ``a_{n+1} = 0``.  Values are Fractions when
    ``sqrt(c0)`` is rational and :class:`QuadExt` elements otherwise.
    """
    c0 = as_rational(c0)
    if c0 <= 0:
        raise DomainError("c0 must be positive")
    if N < 1:
        raise DomainError("N must be >= 1")
    root = rational_sqrt(c0)
    zero = Fraction(0) if root is not None else QuadExt(0, 0, c0)
    a1 = root if root is not None else QuadExt(0, 1, c0)
    a = [zero, a1] + [zero] * N
    for n in range(1, N):
        phi = -_order_equation(a, n, c0)
        a[n + 1] = zero + 1
        slope = _order_equation(a, n, c0) + phi
        expected = -2 * (n + 1) ** 2 * a1
        if not slope == expected:
            raise AssertionError(f"linear coefficient at order {n} is {slope}, expected {expected}")
        a[n + 1] = phi / expected
    return a[1 : N + 1]


def _trunc_mul(p, q, deg, zero):
    out = [zero] * (deg + 1)
    for i, x in enumerate(p[: deg + 1]):
        for j, y in enumerate(q[: deg + 1 - i]):
            out[i + j] = out[i + j] + x * y
    return out


def _trunc_add(*ps):
    m = max(len(p) for p in ps)
    zero = ps[0][0] * 0
    return [sum((p[i] for p in ps if i < len(p)), zero) for i in range(m)]


def series_back_substitution(c0, coeffs, deg=None):
    """Coefficients of the cleared rigidity equation for ``f = sum a_j t^j``, up to t^deg.

    ``2(f'+tf''+2tf'^3)(f-2tf')(t+f^2) + (f-2tf')^2(1+4tf'^2) + c0 (t+f^2)^2 (1+4tf'^2)^2``.
    All coefficients through degree ``N+1`` are determined by ``a_1..a_N``.
    """
    c0 = as_rational(c0)
    N = len(coeffs)
    deg = N + 1 if deg is None else deg
    zero = coeffs[0] * 0
    one = zero + 1
    f = [zero] + list(coeffs) + [zero] * (deg + 2)
    f = f[: deg + 2]
    fp = [(j + 1) * f[j + 1] for j in range(len(f) - 1)]
    fpp = [(j + 1) * fp[j + 1] for j in range(len(fp) - 1)]
    t = [zero, one]

    def mul(*ps):
        out = ps[0]
        for p in ps[1:]:
            out = _trunc_mul(out, p, deg, zero)
        return out

    fp3 = mul(fp, fp, fp)
    bracket1 = _trunc_add(fp, mul(t, fpp), [2 * c for c in mul(t, fp3)])
    g = _trunc_add(f, [-2 * c for c in mul(t, fp)])
    tf2 = _trunc_add(t, mul(f, f))
    q = _trunc_add([one], [4 * c for c in mul(t, fp, fp)])
    term1 = [2 * c for c in mul(bracket1, g, tf2)]
    term2 = mul(g, g, q)
    term3 = [c0 * c for c in mul(tf2, tf2, q, q)]
    total = _trunc_add(term1, term2, term3)
    return total[: deg + 1]


def sphere_series_oracle(c0, N):
    """Taylor coefficients of ``(1 - sqrt(1 - c t)) / sqrt(c)`` with ``c = 4 c0`` (rational sqrt only).

    ``1 - sqrt(1-u) = sum_{m>=1} C(2m, m) u^m / ((2m-1) 4^m)``.
    """
    c0 = as_rational(c0)
    root = rational_sqrt(4 * c0)
    if root is None:
        raise DomainError("oracle needs a rational square root of 4 c0")
    c = 4 * c0
    return [Fraction(math.comb(2 * m, m), (2 * m - 1) * 4**m) * c**m / root for m in range(1, N + 1)]
