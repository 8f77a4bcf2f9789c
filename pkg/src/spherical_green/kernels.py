"""Hot numeric kernels with a numba path and a pure-numpy path.

Every public kernel dispatches on :data:`BACKEND`.  The numba versions are
plain loops compiled with :func:`~spherical_green._jit.jit`; the numpy
versions vectorize over the independent axis instead.  Both produce the same
values up to floating-point reassociation.
"""

import contextlib
import math

import numpy as np

from ._jit import HAVE_NUMBA, jit, numba_requested

BACKEND = "numba" if (HAVE_NUMBA and numba_requested()) else "numpy"


@contextlib.contextmanager
def use_backend(name):
    """Temporarily switch kernel backend (``"numba"`` or ``"numpy"``)."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    saved = BACKEND
    BACKEND = name
    try:
        yield
    finally:
        BACKEND = saved


# --------------------------------------------------------------------------
# Gegenbauer three-term recurrence, evaluated on a vector of points.
# k P_k = 2(k+lam-1) x P_{k-1} - (k+2 lam-2) P_{k-2},  P_0 = 1, P_1 = 2 lam x


@jit
def _gegenbauer_table_nb(lam, kmax, x):
    m = x.shape[0]
    out = np.empty((kmax + 1, m))
    for j in range(m):
        out[0, j] = 1.0
    if kmax >= 1:
        for j in range(m):
            out[1, j] = 2.0 * lam * x[j]
    for k in range(2, kmax + 1):
        a = 2.0 * (k + lam - 1.0) / k
        b = (k + 2.0 * lam - 2.0) / k
        for j in range(m):
            out[k, j] = a * x[j] * out[k - 1, j] - b * out[k - 2, j]
    return out


def _gegenbauer_table_np(lam, kmax, x):
    out = np.empty((kmax + 1, x.shape[0]))
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 2.0 * lam * x
    for k in range(2, kmax + 1):
        out[k] = (2.0 * (k + lam - 1.0) * x * out[k - 1] - (k + 2.0 * lam - 2.0) * out[k - 2]) / k
    return out


def gegenbauer_table(lam, kmax, x):
    """Values ``P^lam_k(x_j)`` for ``k = 0..kmax``, shape ``(kmax+1, len(x))``."""
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    if BACKEND == "numba":
        return _gegenbauer_table_nb(float(lam), int(kmax), x)
    return _gegenbauer_table_np(float(lam), int(kmax), x)


# --------------------------------------------------------------------------
# Gauss nodes for the weight (1-x^2)^(lam-1/2): Newton iteration with implicit
# deflation against the other nodes (simultaneous, Aberth-style).


@jit
def _gegenbauer_value_deriv_nb(lam, n, x):
    p0 = 1.0
    p1 = 2.0 * lam * x
    if n == 0:
        return 1.0, 0.0, 0.0
    for k in range(2, n + 1):
        p2 = (2.0 * (k + lam - 1.0) * x * p1 - (k + 2.0 * lam - 2.0) * p0) / k
        p0 = p1
        p1 = p2
    # (1-x^2) P_n' = -n x P_n + (n + 2 lam - 1) P_{n-1}
    dp = (-n * x * p1 + (n + 2.0 * lam - 1.0) * p0) / (1.0 - x * x)
    return p1, dp, p0


@jit
def _newton_nodes_nb(lam, count, guess, tol, maxiter):
    x = guess.copy()
    step = np.zeros(count)
    done = np.zeros(count, dtype=np.bool_)
    for it in range(maxiter):
        # Jacobi sweep: every correction uses the previous iterate
        for i in range(count):
            if done[i]:
                step[i] = 0.0
                continue
            p, dp, _ = _gegenbauer_value_deriv_nb(lam, count, x[i])
            ratio = p / dp
            s = 0.0
            for j in range(count):
                if j != i:
                    s += 1.0 / (x[i] - x[j])
            step[i] = ratio / (1.0 - ratio * s)
        moved = 0.0
        for i in range(count):
            xn = x[i] - step[i]
            # keep iterates inside (-1, 1); halve the distance to the edge instead
            if xn >= 1.0:
                xn = 0.5 * (x[i] + 1.0)
            elif xn <= -1.0:
                xn = 0.5 * (x[i] - 1.0)
            x[i] = xn
            if not np.isfinite(x[i]):
                return x, i
            if abs(step[i]) <= tol:
                done[i] = True
            if abs(step[i]) > moved:
                moved = abs(step[i])
        if moved <= tol:
            return x, -1
    for i in range(count):
        if not done[i]:
            return x, i
    return x, -1


def _gegenbauer_value_deriv_np(lam, n, x):
    p0 = np.ones_like(x)
    p1 = 2.0 * lam * x
    if n == 0:
        return p0, np.zeros_like(x), np.zeros_like(x)
    for k in range(2, n + 1):
        p0, p1 = p1, (2.0 * (k + lam - 1.0) * x * p1 - (k + 2.0 * lam - 2.0) * p0) / k
    dp = (-n * x * p1 + (n + 2.0 * lam - 1.0) * p0) / (1.0 - x * x)
    return p1, dp, p0


def _newton_nodes_np(lam, count, guess, tol, maxiter):
    x = guess.copy()
    done = np.zeros(count, dtype=bool)
    off = ~np.eye(count, dtype=bool)
    for _ in range(maxiter):
        p, dp, _ = _gegenbauer_value_deriv_np(lam, count, x)
        ratio = p / dp
        diff = x[:, None] - x[None, :]
        s = np.sum(np.where(off, 1.0 / np.where(off, diff, 1.0), 0.0), axis=1)
        step = np.where(done, 0.0, ratio / (1.0 - ratio * s))
        xn = x - step
        xn = np.where(xn >= 1.0, 0.5 * (x + 1.0), xn)
        x = np.where(xn <= -1.0, 0.5 * (x - 1.0), xn)
        bad = np.flatnonzero(~np.isfinite(x))
        if bad.size:
            return x, int(bad[0])
        done |= np.abs(step) <= tol
        if np.all(np.abs(step) <= tol):
            return x, -1
    bad = np.flatnonzero(~done)
    return x, (int(bad[0]) if bad.size else -1)


def gegenbauer_nodes(lam, count, tol=1e-15, maxiter=100):
    """Zeros of ``P^lam_count`` in descending order.

    Returns ``(nodes, failed_index)``; ``failed_index`` is ``-1`` on success.
    """
    # cosine guesses of Chebyshev type, shifted for the weight exponent
    i = np.arange(count)
    guess = np.cos(np.pi * (i + 0.75 + 0.5 * (lam - 0.5)) / (count + lam))
    if BACKEND == "numba":
        x, bad = _newton_nodes_nb(float(lam), int(count), guess, float(tol), int(maxiter))
    else:
        x, bad = _newton_nodes_np(float(lam), int(count), guess, float(tol), int(maxiter))
    return x, int(bad)


def gegenbauer_value_deriv(lam, n, x):
    """``(P_n(x), P_n'(x), P_{n-1}(x))`` for an array of interior points."""
    x = np.asarray(x, dtype=float)
    return _gegenbauer_value_deriv_np(float(lam), int(n), x)


# --------------------------------------------------------------------------
# Iterated Cesaro (arithmetic-mean) averaging of a sequence of partial sums.


@jit
def _cesaro_nb(partials, levels):
    s = partials.copy()
    for _ in range(levels):
        acc = 0.0
        for k in range(s.shape[0]):
            acc += s[k]
            s[k] = acc / (k + 1)
    return s


def _cesaro_np(partials, levels):
    s = partials.copy()
    count = np.arange(1, s.shape[0] + 1)
    for _ in range(levels):
        s = np.cumsum(s) / count
    return s


def cesaro_means(partials, levels):
    """Apply ``levels`` rounds of running arithmetic means to ``partials``."""
    partials = np.ascontiguousarray(np.asarray(partials, dtype=float))
    if BACKEND == "numba":
        return _cesaro_nb(partials, int(levels))
    return _cesaro_np(partials, int(levels))


# --------------------------------------------------------------------------
# Compensated summation in a fixed order (Neumaier); numpy path uses fsum.


@jit
def _neumaier_nb(values):
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def compensated_sum(values):
    values = np.ascontiguousarray(np.ravel(np.asarray(values, dtype=float)))
    if BACKEND == "numba":
        return float(_neumaier_nb(values))
    return math.fsum(values.tolist())
