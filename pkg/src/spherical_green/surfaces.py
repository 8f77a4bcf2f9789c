"""Graph hypersurfaces ``x -> (x, f(x))`` over a ball in R^n.

A surface carries an analytic oracle returning ``f`` and its first three
derivatives.  Oracles are vectorized: they take an ``(m, n)`` array of points
and return arrays with a leading axis of length ``m``.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ChartError, DomainError

BASE_TOL = 1e-12


@dataclass(frozen=True)
class Derivs:
    f: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray


@dataclass(frozen=True)
class GraphSurface:
    """Graph of ``f`` over the open ball of radius ``radius`` in R^dim."""

    dim: int
    radius: float
    oracle: object = field(repr=False)
    name: str = "surface"
    params: dict = field(default_factory=dict)
    first_order: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dimension must be >= 1")
        d = self.oracle(np.zeros((1, self.dim)))
        if abs(d.f[0]) > BASE_TOL or np.max(np.abs(d.grad[0])) > BASE_TOL:
            raise DomainError(
                f"{self.name}: the base point must satisfy f(0)=0 and grad f(0)=0; "
                "translate and rotate the surface first"
            )

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        pts = np.atleast_2d(x)
        if pts.shape[-1] != self.dim:
            raise DomainError(f"expected points in R^{self.dim}, got shape {x.shape}")
        r = np.linalg.norm(pts, axis=1)
        if np.any(r >= self.radius):
            raise ChartError(f"{self.name}: point with |x|={r.max():.6g} outside the chart radius {self.radius:g}")
        return pts

    def derivs(self, x):
        """Derivatives at an array of points ``(m, n)`` (or one point)."""
        return self.oracle(self._points(x))

    def value_grad(self, x):
        """``(f, grad f)`` only; uses the cheap first-order oracle when the surface has one."""
        pts = self._points(x)
        if self.first_order is not None:
            return self.first_order(pts)
        d = self.oracle(pts)
        return d.f, d.grad

    def at(self, x):
        """Derivatives at a single point, without the leading axis."""
        d = self.derivs(np.asarray(x, dtype=float).reshape(1, self.dim))
        return Derivs(d.f[0], d.grad[0], d.hess[0], d.third[0])

    def value(self, x):
        return self.derivs(x).f

    def check_symmetry(self, x, tol=1e-10):
        """Largest asymmetry of the Hessian and third-derivative tensors at ``x``."""
        d = self.derivs(x)
        h = np.max(np.abs(d.hess - np.swapaxes(d.hess, 1, 2)), initial=0.0)
        t = d.third
        perms = [(0, 2, 1, 3), (0, 1, 3, 2), (0, 3, 2, 1), (0, 2, 3, 1), (0, 3, 1, 2)]
        tt = max((np.max(np.abs(t - np.transpose(t, p)), initial=0.0) for p in perms), default=0.0)
        worst = max(h, tt)
        if worst > tol:
            raise DomainError(f"{self.name}: derivative tensors not symmetric (defect {worst:.3g})")
        return worst

    def hessian_at_base(self):
        return self.at(np.zeros(self.dim)).hess

    def to_json(self):
        return {"kind": self.params.get("kind", "custom"), "params": self.params.get("raw", {}), "dim": self.dim}


# --------------------------------------------------------------------------
# built-in oracles


def plane(dim):
    def oracle(x):
        m, n = x.shape
        return Derivs(np.zeros(m), np.zeros((m, n)), np.zeros((m, n, n)), np.zeros((m, n, n, n)))

    def first(x):
        return np.zeros(x.shape[0]), np.zeros(x.shape)

    return GraphSurface(dim, math.inf, oracle, "plane", {"kind": "plane", "raw": {}}, first)


def ellipsoid(horizontal, vertical):
    """Lower cap of ``sum x_i^2/a_i^2 + (z-c)^2/c^2 = 1`` through the origin.

    ``f = c (1 - sqrt(1 - q))`` with ``q = sum x_i^2/a_i^2``, written as
    ``c q / (1 + sqrt(1-q))`` to avoid cancellation near the base point.
    """
    a = np.asarray(horizontal, dtype=float)
    c = float(vertical)
    if np.any(a <= 0) or c <= 0:
        raise DomainError("semi-axes must be positive")
    inv = 1.0 / a**2

    def oracle(x):
        m, n = x.shape
        q = np.einsum("mi,i->m", x * x, inv)
        if np.any(q >= 1.0):
            raise ChartError("point outside the ellipsoid's graph chart")
        s = np.sqrt(1.0 - q)
        f = c * q / (1.0 + s)
        y = x * inv  # x_i / a_i^2
        grad = c * y / s[:, None]
        eye = np.eye(n)
        hess = c * (eye[None] * inv[None, None, :] / s[:, None, None] + np.einsum("mi,mj->mij", y, y) / s[:, None, None] ** 3)
        # d/dx_k of the Hessian
        t1 = np.einsum("ij,mk,i->mijk", eye, y, inv) / s[:, None, None, None] ** 3
        t2 = (np.einsum("ik,mj,i->mijk", eye, y, inv) + np.einsum("jk,mi,j->mijk", eye, y, inv)) / s[
            :, None, None, None
        ] ** 3
        t3 = 3.0 * np.einsum("mi,mj,mk->mijk", y, y, y) / s[:, None, None, None] ** 5
        return Derivs(f, grad, hess, c * (t1 + t2 + t3))

    def first(x):
        q = np.einsum("mi,i->m", x * x, inv)
        if np.any(q >= 1.0):
            raise ChartError("point outside the ellipsoid's graph chart")
        s = np.sqrt(1.0 - q)
        return c * q / (1.0 + s), c * (x * inv) / s[:, None]

    n = a.shape[0]
    return GraphSurface(
        n,
        float(a.min()),
        oracle,
        "ellipsoid",
        {"kind": "ellipsoid", "raw": {"horizontal": a.tolist(), "vertical": c}},
        first,
    )


def sphere(dim, radius=1.0):
    """Lower cap of the round sphere of radius R tangent to the base plane at 0."""
    surf = ellipsoid([radius] * dim, radius)
    return GraphSurface(
        dim, float(radius), surf.oracle, "sphere", {"kind": "sphere", "raw": {"radius": float(radius)}}, surf.first_order
    )


def paraboloid(matrix, chart_radius=10.0):
    """``f = x^T A x / 2`` for a symmetric matrix (or the diagonal given as a vector)."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim == 1:
        A = np.diag(A)
    if A.shape[0] != A.shape[1] or not np.allclose(A, A.T, atol=0, rtol=0):
        raise DomainError("paraboloid needs a symmetric square matrix")
    n = A.shape[0]

    def oracle(x):
        m = x.shape[0]
        grad = x @ A
        f = 0.5 * np.einsum("mi,mi->m", x, grad)
        return Derivs(f, grad, np.broadcast_to(A, (m, n, n)).copy(), np.zeros((m, n, n, n)))

    def first(x):
        grad = x @ A
        return 0.5 * np.einsum("mi,mi->m", x, grad), grad

    raw = {"matrix": A.tolist(), "chart_radius": chart_radius}
    return GraphSurface(n, float(chart_radius), oracle, "paraboloid", {"kind": "paraboloid", "raw": raw}, first)


def polynomial(dim, terms, chart_radius=1.0):
    """Custom polynomial graph; ``terms`` is a list of ``[coefficient, [e_1, ..., e_n]]``."""
    coeffs = []
    exps = []
    for coef, e in terms:
        e = [int(v) for v in e]
        if len(e) != dim or min(e) < 0:
            raise DomainError(f"bad exponent vector {e} for dimension {dim}")
        coeffs.append(float(coef))
        exps.append(e)
    coeffs = np.asarray(coeffs)
    exps = np.asarray(exps, dtype=int).reshape(-1, dim)

    def deriv_terms(order):
        """Coefficient multipliers and exponents after differentiating by the index tuple ``order``."""
        c = coeffs.copy()
        e = exps.copy()
        for i in order:
            c = c * e[:, i]
            e = e.copy()
            e[:, i] = np.maximum(e[:, i] - 1, 0)
        return c, e

    def evaluate(x, order):
        c, e = deriv_terms(order)
        if c.size == 0:
            return np.zeros(x.shape[0])
        mon = np.prod(x[:, None, :] ** e[None, :, :], axis=2)
        return mon @ c

    def oracle(x):
        m, n = x.shape
        f = evaluate(x, ())
        grad = np.stack([evaluate(x, (i,)) for i in range(n)], axis=1) if n else np.zeros((m, 0))
        hess = np.empty((m, n, n))
        third = np.empty((m, n, n, n))
        for i in range(n):
            for j in range(i, n):
                hess[:, i, j] = hess[:, j, i] = evaluate(x, (i, j))
                for k in range(j, n):
                    v = evaluate(x, (i, j, k))
                    for p in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
                        third[(slice(None),) + p] = v
        return Derivs(f, grad, hess, third)

    raw = {"terms": [[float(c), list(map(int, e))] for c, e in zip(coeffs, exps)], "chart_radius": chart_radius}
    return GraphSurface(dim, float(chart_radius), oracle, "custom", {"kind": "custom", "raw": raw})


def from_description(desc):
    """Build a surface from the JSON description ``{"kind", "params", "dim"}``."""
    kind = desc.get("kind")
    params = desc.get("params", {}) or {}
    dim = int(desc.get("dim", 0))
    if kind == "plane":
        return plane(dim)
    if kind == "sphere":
        return sphere(dim, float(params.get("radius", 1.0)))
    if kind == "ellipsoid":
        horizontal = params.get("horizontal")
        if horizontal is None:
            raise DomainError("ellipsoid needs params.horizontal (n semi-axes) and params.vertical")
        if len(horizontal) != dim:
            raise DomainError("ellipsoid: len(horizontal) must equal dim")
        return ellipsoid(horizontal, float(params.get("vertical", 1.0)))
    if kind == "paraboloid":
        mat = params.get("matrix", params.get("diagonal"))
        if mat is None:
            raise DomainError("paraboloid needs params.matrix or params.diagonal")
        surf = paraboloid(mat, float(params.get("chart_radius", 10.0)))
        if surf.dim != dim:
            raise DomainError("paraboloid matrix size must equal dim")
        return surf
    if kind == "custom":
        return polynomial(dim, params.get("terms", []), float(params.get("chart_radius", 1.0)))
    raise DomainError(f"unknown surface kind {kind!r}")


def load_surface(path):
    with open(Path(path)) as fh:
        return from_description(json.load(fh))
