"""Green functions of the conformal operators on S^n.

Three views of the same object are provided and compared:

* the closed forms ``-c_n log|P-Q|`` and ``c_{n,sigma} |P-Q|^(2 sigma - n)``;
* the spectral series ``sum_k (c_{k,n}/lambda_k) (-1)^k P^lam_k(x)`` in the
  variable ``x = -P.Q``, summed with iterated Cesaro means;
* coefficient matching, i.e. the inner products of both sides with each
  ``P^lam_k`` under the weight ``(1-x^2)^((n-2)/2)``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, DomainError, KernelObstruction, PoleError
from .gegenbauer import gegenbauer_eval, gegenbauer_norm_sq
from .reports import ResidualReport
from .special import gamma_ratio, gamma_real, pochhammer, sphere_volume
from .spectrum import (
    KernelStatus,
    OperatorOrder,
    eig_critical,
    eig_fractional,
    funk_hecke_coeff,
    kernel_status,
)


@dataclass(frozen=True)
class GreenSpec:
    n: int
    order: OperatorOrder

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("sphere dimension must be >= 2")
        status = kernel_status(self.n, self.order)
        if status is KernelStatus.NONTRIVIAL:
            raise KernelObstruction(
                f"kernel obstruction: P_{2 * self.order.k} on S^{self.n} has kernel beyond the "
                "constants, so no Green function exists"
            )

    @classmethod
    def critical(cls, n):
        return cls(n, OperatorOrder.critical())

    @classmethod
    def power(cls, n, sigma):
        return cls(n, OperatorOrder.fractional(sigma))

    @classmethod
    def integer(cls, n, k):
        return cls(n, OperatorOrder.integer(k))

    @property
    def is_critical(self):
        return self.order.kind == "critical" or 2 * self.order.sigma == self.n

    @property
    def sigma(self):
        return self.order.half_order(self.n)

    @property
    def first_degree(self):
        return 1 if self.is_critical else 0

    def eigenvalue(self, k):
        if self.is_critical:
            return eig_critical(self.n, k)
        return eig_fractional(self.n, self.sigma, k)

    def label(self):
        return f"n={self.n},{self.order.label()}"


class Acceleration(enum.Enum):
    NONE = "none"
    CESARO = "cesaro"
    EULER = "euler"


@dataclass(frozen=True)
class SeriesConfig:
    max_terms: int = 5000
    acceleration: Acceleration = Acceleration.CESARO
    target_tol: float = 1e-3
    levels: int = 3

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")
        if not self.target_tol > 0:
            raise DomainError("target_tol must be positive")
        object.__setattr__(self, "acceleration", Acceleration(self.acceleration))


@dataclass(frozen=True)
class SeriesResult:
    value: float
    error_estimate: float
    terms: int


# --------------------------------------------------------------------------
# constants and closed forms


def const_critical(n):
    """``c_n = 2 / (Gamma(n) |S^n|)``."""
    if n < 2:
        raise DomainError("n must be >= 2")
    return 2.0 / (gamma_real(n) * sphere_volume(n))


def const_critical_alt(n):
    """``c_n = 1 / (2^(n-1) pi^(n/2) Gamma(n/2))``, the second closed form."""
    if n < 2:
        raise DomainError("n must be >= 2")
    return 1.0 / (2.0 ** (n - 1) * math.pi ** (n / 2.0) * gamma_real(n / 2.0))


def const_power(n, sigma):
    """``c_{n,sigma} = Gamma(n/2 - sigma) / (4^sigma pi^(n/2) Gamma(sigma))``, sign kept."""
    sigma = float(sigma)
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    a = n / 2.0 - sigma
    if a <= 0 and a == math.floor(a):
        raise PoleError(f"c_(n,sigma) has a pole at sigma={sigma:g} for n={n}")
    return gamma_ratio([a], [sigma]) / (4.0**sigma * math.pi ** (n / 2.0))


def const_power_alt(n, sigma):
    """Independent route to ``c_{n,sigma}``.

    For sigma = 1 this is ``1 / ((n-2) |S^(n-1)|)``; otherwise Gamma(n/2 - sigma)
    is reached from Gamma(n/2 - sigma + m) > 0 by m downward recurrence steps.
    """
    sigma = float(sigma)
    if sigma == 1.0 and n > 2:
        return 1.0 / ((n - 2) * sphere_volume(n - 1))
    a = n / 2.0 - sigma
    if a <= 0 and a == math.floor(a):
        raise PoleError(f"c_(n,sigma) has a pole at sigma={sigma:g} for n={n}")
    m = max(0, math.floor(-a) + 1)
    g = math.gamma(a + m) / pochhammer(a, m)
    return g / (2.0 ** (2 * sigma) * math.pi ** (n / 2.0) * math.gamma(sigma))


def chord_sq_from_inner(x):
    """``|P-Q|^2 = 2 (1 + x)`` for ``x = -P.Q``."""
    if not -1.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [-1, 1], got {x!r}")
    return 2.0 * (1.0 + x)


def green_closed(spec, chord):
    """Closed-form Green function at chord distance ``chord`` (critical additive constant 0)."""
    if not chord > 0:
        raise DomainError("chord must be positive (the Green function is singular at P=Q)")
    if chord > 2.0 + 1e-15:
        raise DomainError("chord distance on the unit sphere is at most 2")
    if spec.is_critical:
        return -const_critical(spec.n) * math.log(chord)
    return const_power(spec.n, spec.sigma) * chord ** (2.0 * spec.sigma - spec.n)


def green_closed_inner(spec, x):
    """Closed form in the variable ``x = -P.Q``."""
    return green_closed(spec, math.sqrt(chord_sq_from_inner(x)))


# --------------------------------------------------------------------------
# spectral series


def series_coefficients(spec, kmax):
    """``c_{k,n} / lambda_k`` for ``k = 0..kmax`` (zero at k = 0 in the critical case)."""
    out = np.zeros(kmax + 1)
    for k in range(spec.first_degree, kmax + 1):
        out[k] = funk_hecke_coeff(spec.n, k) / spec.eigenvalue(k)
    return out


def series_terms(spec, x, kmax):
    """Signed terms ``(c_{k,n}/lambda_k) (-1)^k P^lam_k(x)``, ascending k."""
    lam = (spec.n - 1) / 2.0
    table = kernels.gegenbauer_table(lam, kmax, np.array([float(x)]))[:, 0]
    signs = np.where(np.arange(kmax + 1) % 2 == 0, 1.0, -1.0)
    return series_coefficients(spec, kmax) * signs * table


def accelerate(partials, cfg, levels=None):
    """Sequence of accelerated estimates, one per truncation index."""
    if cfg.acceleration is Acceleration.NONE:
        return np.asarray(partials, dtype=float)
    if cfg.acceleration is Acceleration.CESARO:
        return kernels.cesaro_means(partials, cfg.levels if levels is None else levels)
    return euler_means(partials)


def euler_means(partials):
    """Binomial (Euler-Knopp) means ``2^-K sum_j C(K,j) S_j`` for every K."""
    partials = np.asarray(partials, dtype=float)
    from scipy.special import gammaln

    out = np.empty_like(partials)
    for K in range(partials.shape[0]):
        j = np.arange(K + 1)
        logw = gammaln(K + 1) - gammaln(j + 1) - gammaln(K - j + 1) - K * math.log(2.0)
        out[K] = kernels.compensated_sum(np.exp(logw) * partials[: K + 1])
    return out


def _check_series_point(spec, x):
    if not -1.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [-1, 1], got {x!r}")
    if x == -1.0 and (spec.is_critical or 2 * spec.sigma < spec.n):
        raise DomainError("x = -1 is the coincidence point P = Q where the series diverges")


def cesaro_levels(spec, cfg):
    """Averaging depth actually used: at least ``cfg.levels``, and more than the growth order.

    At ``x = +-1`` the terms grow like ``k^(n-1-2 sigma)``; iterated Cesaro
    means of depth ``r`` only sum such a series when ``r`` exceeds that power.
    """
    growth = spec.n - 1 - 2.0 * spec.sigma
    return max(cfg.levels, math.floor(growth) + 1)


def series_estimates(spec, x, cfg):
    """Accelerated estimates for every truncation ``K = 1..cfg.max_terms``.

    Entry ``K-1`` uses the terms of degree ``< K + first_degree``; summation
    order is ascending in k.
    """
    _check_series_point(spec, x)
    kmax = cfg.max_terms + spec.first_degree - 1
    terms = series_terms(spec, x, kmax)[spec.first_degree :]
    return accelerate(np.cumsum(terms), cfg, cesaro_levels(spec, cfg))


def series_partial(spec, x, cfg=None):
    """Accelerated partial sum with an error estimate.

    The estimate is the change between truncations ``K/2`` and ``K``.

    Raises
    ------
    ConvergenceError
        If the estimates are still growing over the last two doublings.
    """
    cfg = cfg or SeriesConfig()
    est = series_estimates(spec, x, cfg)
    K = est.shape[0]
    value = float(est[-1])
    if K < 4:
        return SeriesResult(value, math.inf, K)
    e1 = abs(est[-1] - est[K // 2 - 1])
    e2 = abs(est[K // 2 - 1] - est[K // 4 - 1])
    if not math.isfinite(value) or (K >= 64 and e1 > 2.0 * e2 and e1 > cfg.target_tol):
        raise ConvergenceError(
            f"series for {spec.label()} at x={x:g} is not settling: "
            f"change {e1:.3g} over the last doubling versus {e2:.3g} before"
        )
    return SeriesResult(value, float(e1), K)


# --------------------------------------------------------------------------
# moments and coefficient matching


def rodrigues_prefactor(n, k):
    """``(-2)^k/k! * Gamma(k+lam) Gamma(k+2lam) / (Gamma(lam) Gamma(2k+2lam))``, lam=(n-1)/2."""
    lam = (n - 1) / 2.0
    return ((-2.0) ** k / math.factorial(k) if k < 170 else math.copysign(1.0, (-1.0) ** k) * math.exp(
        k * math.log(2.0) - math.lgamma(k + 1)
    )) * gamma_ratio([k + lam, k + 2 * lam], [lam, 2 * k + 2 * lam])


def moment_closed_log(n, k):
    """``int log(1+x) P^lam_k(x) (1-x^2)^((n-2)/2) dx`` for k >= 1."""
    if k < 1:
        raise DomainError("log moment is defined here for k >= 1")
    return -2.0 * math.sqrt(math.pi) * gamma_ratio([n / 2.0], [(n - 1) / 2.0]) * (-1.0) ** k / (k * (k + n - 1))


def moment_closed_pow(n, sigma, k):
    """``int (1+x)^(sigma-n/2) P^lam_k(x) (1-x^2)^((n-2)/2) dx``.

    After k integrations by parts of the Rodrigues form the integral becomes
    a Beta integral, giving ``prefactor * (n/2-sigma)_k * 2^(sigma+k+n/2-1)
    Gamma(sigma) Gamma(k+n/2) / Gamma(sigma+k+n/2)``.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    h = n / 2.0
    beta = 2.0 ** (sigma + k + h - 1) * gamma_ratio([sigma, k + h], [sigma + k + h])
    return rodrigues_prefactor(n, k) * pochhammer(h - sigma, k) * beta


def quad_nodes(k):
    """Oracle quadrature size ``2(k+8)``."""
    return 2 * (k + 8)


def jacobi_rule(count, a, b):
    """Gauss rule for ``(1-x)^a (1+x)^b`` on [-1, 1].

    scipy's nodes are polished by Newton steps on ``P^(a,b)_count`` and the
    weights recomputed from the closed form
    ``2^(a+b+1) Gamma(N+a+1) Gamma(N+b+1) / (Gamma(N+a+b+1) N! (1-x^2) P'(x)^2)``;
    the eigenvector weights scipy returns lose digits as ``count`` grows.
    """
    from scipy.special import eval_jacobi, gammaln, roots_jacobi

    x, _ = roots_jacobi(count, a, b)
    scale = 0.5 * (count + a + b + 1)
    for _ in range(3):
        x = x - eval_jacobi(count, a, b, x) / (scale * eval_jacobi(count - 1, a + 1, b + 1, x))
    dp = scale * eval_jacobi(count - 1, a + 1, b + 1, x)
    logc = (
        gammaln(count + a + 1)
        + gammaln(count + b + 1)
        - gammaln(count + a + b + 1)
        - gammaln(count + 1)
        + (a + b + 1) * math.log(2.0)
    )
    return x, np.exp(logc) / ((1.0 - x * x) * dp * dp)


def moment_quad_pow(n, sigma, k, nodes=None):
    """Gauss-Jacobi oracle for :func:`moment_closed_pow` (the power folded into the weight)."""
    a = (n - 2) / 2.0
    b = a + sigma - n / 2.0
    x, w = jacobi_rule(nodes or quad_nodes(k), a, b)
    return kernels.compensated_sum(w * gegenbauer_eval((n - 1) / 2.0, k, x))


def _quiet_quad(quad, *args, **kwargs):
    import warnings

    from scipy.integrate import IntegrationWarning

    with warnings.catch_warnings():
        # QUADPACK flags roundoff once it is already at the requested 1e-13 floor
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(*args, **kwargs)


def moment_quad_log(n, k):
    """Adaptive algebraic-logarithmic quadrature oracle for :func:`moment_closed_log`."""
    from scipy.integrate import quad

    a = (n - 2) / 2.0
    lam = (n - 1) / 2.0
    val, _ = _quiet_quad(
        quad,
        lambda t: float(gegenbauer_eval(lam, k, t)),
        -1.0,
        1.0,
        weight="alg-loga",
        wvar=(a, a),
        epsabs=1e-14,
        epsrel=1e-13,
        limit=200,
    )
    return val


def coefficient_match(spec, k, tol=1e-9):
    """Inner products of the series and of the closed form with ``P^lam_k``.

    The series side is ``(c_{k,n}/lambda_k) (-1)^k |P^lam_k|^2``.  The
    closed side is ``-(c_n/2)`` times the log moment (critical) or
    ``c_{n,sigma} 2^(sigma-n/2)`` times the power moment, because
    ``|P-Q|^(2sigma-n) = (2(1+x))^(sigma-n/2)``.
    """
    n = spec.n
    if k < spec.first_degree:
        raise DomainError(f"degree {k} carries no coefficient for {spec.label()}")
    lam = (n - 1) / 2.0
    series_side = funk_hecke_coeff(n, k) / spec.eigenvalue(k) * (-1.0) ** k * gegenbauer_norm_sq(lam, k)
    if spec.is_critical:
        closed_side = -0.5 * const_critical(n) * moment_closed_log(n, k)
    else:
        s = spec.sigma
        closed_side = const_power(n, s) * 2.0 ** (s - n / 2.0) * moment_closed_pow(n, s, k)
    residual = abs(closed_side - series_side)
    return ResidualReport.check(
        "coefficient_match",
        residual,
        0.0,
        tol,
        n=n,
        order=spec.order.label(),
        k=k,
        series_side=series_side,
        closed_side=closed_side,
    )
