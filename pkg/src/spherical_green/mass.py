"""Mass of the inverted metric at infinity.

Under the inversion ``y = x / |x|^2`` the metric ``rho^-2 g`` of a graph
hypersurface becomes asymptotically flat.  Along the ray ``y = r yhat`` only
two scalars are needed:

    g_rr - 1   = ((grad f . yhat)^2 - 2A - A^2) / (1+A)^2
    tr g - n   = (|grad f|^2 - n (2A + A^2)) / (1+A)^2,   A = r^2 f^2,

with ``f`` evaluated at ``x = yhat / r``.  Writing them as deviations from
the flat values avoids the cancellation in the flux integrand.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ChartError, ConvergenceError, DomainError
from .gegenbauer import gauss_jacobi_rule

ZERO_FLOOR = 1e-12
CHUNK = 1 << 17


def inverted_metric(surface, y):
    """``rho(x)^-2 J^T g(x) J`` at ``y`` with ``x = y/|y|^2`` and ``J = (I - 2 yhat yhat^T)/|y|^2``.

    The reflection squares to the identity and ``|y|^2 rho = 1 + |y|^2 f^2``,
    so this is ``(I + w w^T) / (1 + A)^2`` with ``w = R grad f``, ``A = |y|^2 f^2``.
    """
    y = np.asarray(y, dtype=float)
    r2 = y @ y
    if r2 == 0:
        raise ChartError("y = 0 is not in the inverted chart")
    x = y / r2
    if np.linalg.norm(x) >= surface.radius:
        raise ChartError(f"|y| = {math.sqrt(r2):g} maps outside the surface chart")
    f, grad = surface.value_grad(x[None, :])
    f, grad = f[0], grad[0]
    yhat = y / math.sqrt(r2)
    w = grad - 2.0 * (yhat @ grad) * yhat
    A = r2 * f * f
    return (np.eye(surface.dim) + np.outer(w, w)) / (1.0 + A) ** 2


def sphere_rule(dim, order, rotation=None):
    """Product rule on the unit sphere S^(dim-1) in R^dim.

    Each polar angle uses ``order`` Gauss nodes for its ``sin^m`` weight and
    the azimuth ``2*order`` equispaced points.  Returns ``(points, weights)``.
    """
    if dim < 2:
        raise DomainError("sphere rule needs dim >= 2")
    m = 2 * order
    phi = 2.0 * np.pi * np.arange(m) / m
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    wts = np.full(m, 2.0 * np.pi / m)
    # add polar angles one at a time: S^(k) from S^(k-1) with weight sin^(k-1)
    for k in range(2, dim):
        rule = gauss_jacobi_rule((k - 1) / 2.0, order)
        u = rule.nodes
        s = np.sqrt(1.0 - u * u)
        pts = np.concatenate([u[:, None, None] * np.ones((1, pts.shape[0], 1)), s[:, None, None] * pts[None]], axis=2)
        pts = pts.reshape(-1, k + 1)
        wts = (rule.weights[:, None] * wts[None, :]).ravel()
    if rotation is not None:
        pts = pts @ np.asarray(rotation, dtype=float).T
    return pts, wts


def random_rotation(dim, seed):
    """Haar-random orthogonal matrix from a seeded QR factorization."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _deviations(surface, yhat, s):
    """``(g_rr - 1, tr g - n)`` at radius ``s`` along unit directions ``yhat``."""
    x = yhat / s
    f, grad = surface.value_grad(x)
    A = (s * f) ** 2
    q = 2.0 * A + A * A
    den = (1.0 + A) ** 2
    gr = np.einsum("mi,mi->m", grad, yhat)
    drr = (gr * gr - q) / den
    dtr = (np.einsum("mi,mi->m", grad, grad) - surface.dim * q) / den
    return drr, dtr


def mass_integrand(surface, yhat, r, rel_step=1e-4):
    """``d_r(g_rr - tr g) + (n g_rr - tr g)/r`` at ``y = r yhat``; 4th-order central difference in r."""
    n = surface.dim
    h = r * rel_step
    stencil = ((-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0))
    deriv = np.zeros(yhat.shape[0])
    for off, c in stencil:
        drr, dtr = _deviations(surface, yhat, r + off * h)
        deriv += c * (drr - dtr)
    deriv /= 12.0 * h
    drr, dtr = _deviations(surface, yhat, r)
    return deriv + (n * drr - dtr) / r


def mass_estimate(surface, r, order=32, rotation=None):
    """Flux integral over ``|y| = r`` with the product rule of the given order."""
    n = surface.dim
    if n not in (3, 4, 5):
        raise DomainError("mass estimates are supported for n in {3, 4, 5}")
    if not r > 0 or 1.0 / (r * (1.0 - 2.0e-4)) >= surface.radius:
        raise ChartError(f"radius {r:g} is outside the inverted chart")
    pts, wts = sphere_rule(n, order, rotation)
    partial = []
    for lo in range(0, pts.shape[0], CHUNK):
        vals = mass_integrand(surface, pts[lo : lo + CHUNK], r)
        partial.append(wts[lo : lo + CHUNK] * vals)
    return r ** (n - 1) * kernels.compensated_sum(np.concatenate(partial))


def resolution_check(surface, r, order=32, rel_tol=1e-6, abs_tol=1e-14):
    """Compare orders ``order`` and ``2*order``; raise if they disagree by more than 10x the tolerance."""
    m1 = mass_estimate(surface, r, order)
    m2 = mass_estimate(surface, r, 2 * order)
    tol = rel_tol * abs(m2) + abs_tol
    if abs(m2 - m1) > 10.0 * tol:
        raise ConvergenceError(f"sphere quadrature under-resolved at r={r:g}: {m1:.6g} vs {m2:.6g}")
    return m1, m2


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    extrapolated_mass: float
    radii: tuple
    masses: tuple
    monotone: bool
    exact_zero: bool = False
    predicted_exponent: float = None
    notes: tuple = field(default_factory=tuple)


def _base_is_umbilic(surface, tol=1e-10):
    h = surface.hessian_at_base()
    mean = np.trace(h) / surface.dim
    return float(np.max(np.abs(h - mean * np.eye(surface.dim)))) <= tol


def decay_fit(surface, radii, order=32, rotation=None):
    """Least-squares decay exponent of ``|m(r)|`` and a Richardson limit ``r -> inf``.

    The integrand is analytic in ``1/r``, so the extrapolation model is
    ``m(r) = m_inf + sum_j C_j r^(p-j)`` with ``p`` the fitted exponent rounded
    to an integer and ``j < min(len(radii) - 1, 3)``, solved by least squares.
    """
    radii = tuple(float(r) for r in radii)
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError("decay_fit needs at least three increasing radii")
    masses = tuple(mass_estimate(surface, r, order, rotation) for r in radii)
    predicted = surface.dim - 6.0 if _base_is_umbilic(surface) else None
    notes = [] if predicted is not None else ["base point not umbilic: no decay prediction"]
    mags = np.abs(masses)
    if np.all(mags < ZERO_FLOOR):
        return DecayFit(math.nan, 0.0, radii, masses, True, True, predicted, tuple(notes + ["exact zero"]))
    monotone = bool(np.all(np.diff(mags) < 0) or np.all(np.diff(mags) > 0))
    if not monotone:
        notes.append("non-monotone |m(r)|")
    logr = np.log(radii)
    logm = np.log(np.maximum(mags, 1e-300))
    slope = float(np.polyfit(logr, logm, 1)[0])
    p = round(slope)
    terms = min(len(radii) - 1, 3)
    r = np.asarray(radii) / radii[0]  # column scaling only
    design = np.column_stack([np.ones_like(r)] + [r ** float(p - j) for j in range(terms)])
    extrapolated = np.linalg.lstsq(design, np.asarray(masses), rcond=None)[0][0] if p < 0 else math.nan
    return DecayFit(slope, float(extrapolated), radii, masses, monotone, False, predicted, tuple(notes))


def mass_csv(rows):
    """CSV text with columns ``r, m_hat, quad_order``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "m_hat", "quad_order"])
    for r, m, order in rows:
        w.writerow([repr(float(r)), repr(float(m)), int(order)])
    return buf.getvalue()
