"""Geodesics from the base point of a graph hypersurface and the quartic
coefficient of the squared chord along them.

The position is integrated as ``x(r) = r v + z(r)`` so that the chord
excess ``rho - r^2 = 2 r v.z + |z|^2 + f^2`` (with ``|v| = 1``) is formed
without cancellation; it is exactly zero on a flat graph.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartError, ConvergenceError, DomainError
from .reports import ResidualReport

CUTS = (0.05, 0.1, 0.2)


@dataclass(frozen=True)
class GeodesicSample:
    r: float
    rho: float
    x: np.ndarray
    excess: float


@dataclass(frozen=True)
class GeodesicTrace:
    samples: tuple
    speed_drift: float
    step: float

    @property
    def r(self):
        return np.array([s.r for s in self.samples])

    @property
    def rho(self):
        return np.array([s.rho for s in self.samples])

    @property
    def excess(self):
        return np.array([s.excess for s in self.samples])


def _accel(S, x, xp):
    """``-f_a / (1 + |grad f|^2) * (x'^T Hess f x')`` for a batch of states."""
    d = S.derivs(x)
    quad = np.einsum("mi,mij,mj->m", xp, d.hess, xp)
    w2 = 1.0 + np.einsum("mi,mi->m", d.grad, d.grad)
    return -d.grad * (quad / w2)[:, None]


def _speed2(S, x, xp):
    d = S.derivs(x)
    s = np.einsum("mi,mi->m", d.grad, xp)
    return np.einsum("mi,mi->m", xp, xp) + s * s


def geodesic_shoot_many(S, V, r_max, samples=4096, drift_abort=1e-6):
    """Classical RK4 for a batch of unit directions ``V`` (rows), fixed step ``r_max/samples``.

    Returns ``(r, excess, positions, drift)`` with ``excess`` of shape
    ``(m, samples+1)`` and ``positions`` of shape ``(m, samples+1, n)``.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    norms = np.linalg.norm(V, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise DomainError("initial directions must be unit vectors")
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    m, n = V.shape
    h = r_max / samples
    z = np.zeros((m, n))
    w = np.zeros((m, n))

    def rhs(r, z, w):
        x = r * V + z
        return w, _accel(S, x, V + w)

    excess = np.zeros((m, samples + 1))
    pos = np.zeros((m, samples + 1, n))
    drift = 0.0
    for i in range(samples):
        r = i * h
        rn = (i + 1) * h
        try:
            k1z, k1w = rhs(r, z, w)
            k2z, k2w = rhs(r + 0.5 * h, z + 0.5 * h * k1z, w + 0.5 * h * k1w)
            k3z, k3w = rhs(r + 0.5 * h, z + 0.5 * h * k2z, w + 0.5 * h * k2w)
            k4z, k4w = rhs(r + h, z + h * k3z, w + h * k3w)
            z = z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            w = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
            x = rn * V + z
            f, _ = S.value_grad(x)
        except ChartError as exc:
            raise ChartError(f"geodesic left the chart at r={rn:g}: {exc}") from exc
        excess[:, i + 1] = 2.0 * rn * np.einsum("mi,mi->m", V, z) + np.einsum("mi,mi->m", z, z) + f * f
        pos[:, i + 1] = x
        if (i + 1) % 64 == 0 or i + 1 == samples:
            dev = float(np.max(np.abs(_speed2(S, x, V + w) - 1.0)))
            drift = max(drift, dev)
            if dev > drift_abort:
                raise ConvergenceError(f"unit speed drifted by {dev:.3g} at r={rn:g}")
    r = h * np.arange(samples + 1)
    return r, excess, pos, drift


def geodesic_shoot(S, v, r_max, samples=4096):
    """Unit-speed geodesic from the base point in direction ``v``; samples at ``r = i r_max/samples``."""
    r, excess, pos, drift = geodesic_shoot_many(S, [v], r_max, samples)
    out = tuple(
        GeodesicSample(float(r[i]), float(r[i] ** 2 + excess[0, i]), pos[0, i].copy(), float(excess[0, i]))
        for i in range(r.shape[0])
    )
    return GeodesicTrace(out, drift, r_max / samples)


def _fit_arrays(samples):
    if isinstance(samples, GeodesicTrace):
        return samples.r, samples.excess
    r = np.array([s.r for s in samples])
    ex = np.array([s.excess for s in samples])
    return r, ex


def quartic_fit(samples, r_cut):
    """Weighted least-squares ``c4`` in ``rho = r^2 + c4 r^4`` over ``0 < r <= r_cut``.

    Residuals are weighted by ``r^-4`` so every sample counts alike, which
    gives ``c4 = sum (rho - r^2) / sum r^4``.
    """
    r, ex = _fit_arrays(samples)
    sel = (r > 0) & (r <= r_cut * (1 + 1e-12))
    if np.count_nonzero(sel) < 8:
        raise DomainError(f"too few samples below r_cut={r_cut:g}")
    r4 = r[sel] ** 4
    return float(np.sum(ex[sel]) / np.sum(r4))


def taylor_fit(samples, r_cut, degree=5):
    """Unconstrained fit ``rho = sum_{j=1..degree} a_j r^j``; returns ``(a_1, ..., a_degree)``.

    Raises
    ------
    ConvergenceError
        If the scaled design matrix has condition number above 1e8.
    """
    r, ex = _fit_arrays(samples)
    sel = (r > 0) & (r <= r_cut * (1 + 1e-12))
    t = r[sel] / r_cut
    design = np.column_stack([t**j for j in range(1, degree + 1)])
    cond = np.linalg.cond(design)
    if cond > 1e8:
        raise ConvergenceError(f"ill-conditioned fit (condition {cond:.3g})")
    rho = r[sel] ** 2 + ex[sel]
    coef = np.linalg.lstsq(design, rho, rcond=None)[0]
    return tuple(float(c / r_cut**j) for c, j in zip(coef, range(1, degree + 1)))


def plateau_c4(samples, cuts=CUTS):
    """``c4`` at each cut on a doubling ladder and its small-cut limit.

    The fit leaves out higher powers, so ``c4(r_cut)`` drifts like
    ``r_cut^p``.  When the two gaps between successive cuts shrink
    geometrically the drift is removed Aitken-style; otherwise (flat data,
    or no clean ratio) the smallest cut is reported as is.

    Returns ``(c4, r_cut_used, scan)``; ``r_cut_used`` is None for the extrapolated value.
    """
    vals = [quartic_fit(samples, c) for c in cuts]
    if len(vals) < 3:
        return vals[0], cuts[0], vals
    g1 = vals[1] - vals[0]
    g2 = vals[2] - vals[1]
    if abs(g1) < 1e-13 or g1 * g2 <= 0:
        return vals[0], cuts[0], vals
    ratio = g2 / g1
    if not 1.5 < ratio < 20.0:
        return vals[0], cuts[0], vals
    return vals[0] - g1 / (ratio - 1.0), None, vals


def chord_expansion_check(S, v, tol=1e-4, samples=4096, cuts=CUTS, trace=None):
    """``|c4 + II(v,v)^2 / 12|`` with ``II(v,v)`` from the Hessian at the base point.

    A precomputed ``trace`` reaching ``max(cuts)`` may be passed to skip the shoot.
    """
    v = np.asarray(v, dtype=float)
    if trace is None:
        trace = geodesic_shoot(S, v, max(cuts), samples)
    c4, cut, scan = plateau_c4(trace, cuts)
    iivv = float(v @ S.hessian_at_base() @ v)
    target = -(iivv**2) / 12.0
    return ResidualReport.check(
        "chord_expansion",
        abs(c4 - target),
        0.0,
        tol,
        surface=S.name,
        v=v.tolist(),
        c4=c4,
        c4_target=target,
        r_cut=cut,
        c4_scan=list(scan),
        speed_drift=trace.speed_drift,
    )


def trace_csv(trace):
    """CSV text with columns ``r, rho``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "rho"])
    for s in trace.samples:
        w.writerow([repr(s.r), repr(s.rho)])
    return buf.getvalue()
