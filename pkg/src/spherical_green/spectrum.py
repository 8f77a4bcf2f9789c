"""Eigenvalues, multiplicities and kernel structure of the conformal
operators ``P_2sigma`` on the round sphere S^n."""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, KernelObstruction
from .special import gamma_ratio, sphere_volume

SIGMA_POLE_TOL = 1e-9


@dataclass(frozen=True)
class OperatorOrder:
    """Which operator: ``critical`` (order n), ``integer`` (order 2k) or ``fractional`` (order 2 sigma)."""

    kind: str
    k: int = 0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("critical", "integer", "fractional"):
            raise DomainError(f"unknown operator kind {self.kind!r}")
        if self.kind == "integer" and (int(self.k) != self.k or self.k < 1):
            raise DomainError("integer order needs k >= 1")
        if self.kind == "fractional" and not self.sigma > 0:
            raise DomainError("fractional order needs sigma > 0")

    @classmethod
    def critical(cls):
        return cls("critical")

    @classmethod
    def integer(cls, k):
        return cls("integer", k=int(k), sigma=float(k))

    @classmethod
    def fractional(cls, sigma):
        return cls("fractional", sigma=float(sigma))

    def half_order(self, n):
        """sigma with the operator of order 2 sigma (n/2 for the critical one)."""
        return n / 2.0 if self.kind == "critical" else float(self.sigma)

    def label(self):
        if self.kind == "critical":
            return "critical"
        if self.kind == "integer":
            return f"k={self.k}"
        return f"sigma={self.sigma:g}"


class KernelStatus(enum.Enum):
    TRIVIAL = "TrivialKernel"
    CONSTANTS = "ConstantsOnly"
    NONTRIVIAL = "NontrivialKernel"


def sigma_pole_distance(n, sigma):
    """Distance from sigma to the excluded set {n/2 + m : m = 0, 1, 2, ...}."""
    m = round(sigma - n / 2.0)
    if m < 0:
        return n / 2.0 - sigma
    return abs(sigma - (n / 2.0 + m))


def validate_sigma(n, sigma, tol=SIGMA_POLE_TOL):
    """Reject sigma at (or within ``tol`` of) n/2, n/2+1, n/2+2, ..."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if sigma_pole_distance(n, sigma) <= tol:
        raise DomainError(
            f"sigma={sigma!r} is within {tol:g} of the excluded set n/2 + {{0,1,2,...}} for n={n}"
        )
    return float(sigma)


def eig_critical(n, l):
    """``Gamma(l+n) / Gamma(l)``, the degree-l eigenvalue of the critical operator."""
    if l < 1:
        raise DomainError("degree must be >= 1 (degree 0 is the kernel)")
    return gamma_ratio([l + n], [l])


def eig_fractional(n, sigma, k):
    """``Gamma(k + n/2 + sigma) / Gamma(k + n/2 - sigma)``.

    ``sigma = n/2`` is accepted here (it reproduces the critical ladder); the
    degree-0 eigenvalue is then zero and :class:`KernelObstruction` is raised.
    """
    if k < 0:
        raise DomainError("degree must be >= 0")
    sigma = float(sigma)
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if sigma != n / 2.0:
        validate_sigma(n, sigma)
    val = gamma_ratio([k + n / 2.0 + sigma], [k + n / 2.0 - sigma])
    if val == 0.0:
        raise KernelObstruction(f"eigenvalue of degree {k} vanishes for n={n}, sigma={sigma:g}")
    return val


def eig_integer_product(n, k, j):
    """Factorized eigenvalue ``prod_{i=1..k} (mu_j + (n/2+i-1)(n/2-i))``, exact.

    ``mu_j = j (j+n-1)`` is the Laplace eigenvalue in degree j.
    """
    mu = j * (j + n - 1)
    h = Fraction(n, 2)
    out = Fraction(1)
    for i in range(1, k + 1):
        out *= mu + (h + i - 1) * (h - i)
    return out


def harmonic_dim(n, k):
    """Dimension of degree-k spherical harmonics on S^n, as an exact integer."""
    if n < 2 or k < 0:
        raise DomainError("need n >= 2 and k >= 0")
    num = (n + 2 * k - 1) * math.factorial(n + k - 2)
    den = math.factorial(n - 1) * math.factorial(k)
    q, r = divmod(num, den)
    assert r == 0
    return q


def funk_hecke_coeff(n, k):
    """``c_{k,n} = (n+2k-1) / ((n-1) |S^n|)``."""
    if n < 2 or k < 0:
        raise DomainError("need n >= 2 and k >= 0")
    return (n + 2 * k - 1) / ((n - 1) * sphere_volume(n))


def laplace_degree(n, mu):
    """The degree j >= 0 with j(j+n-1) = mu, or None if mu is not a Laplace eigenvalue."""
    if mu < 0:
        return None
    disc = (n - 1) ** 2 + 4 * mu
    r = math.isqrt(disc)
    if r * r != disc or (r - (n - 1)) % 2:
        return None
    return (r - (n - 1)) // 2


def kernel_factors(n, k):
    """Degrees j whose eigenvalue is killed by a factor of the order-2k product.

    Factor i vanishes on degree j iff ``4 j (j+n-1) = (2i-n)(2i+n-2)``; this is
    integer arithmetic throughout.  Returns sorted ``(i, j)`` pairs.
    """
    hits = []
    for i in range(1, k + 1):
        num = (2 * i - n) * (2 * i + n - 2)
        if num % 4:
            continue
        j = laplace_degree(n, num // 4)
        if j is not None:
            hits.append((i, j))
    return hits


def kernel_status(n, order):
    """Classify the kernel of the operator of the given order on S^n."""
    if order.kind == "critical":
        return KernelStatus.CONSTANTS
    if order.kind == "integer":
        degrees = {j for _, j in kernel_factors(n, order.k)}
        if not degrees:
            return KernelStatus.TRIVIAL
        if degrees == {0}:
            return KernelStatus.CONSTANTS
        return KernelStatus.NONTRIVIAL
    validate_sigma(n, order.sigma)
    return KernelStatus.TRIVIAL
