"""Command-line front end: every verification as a subcommand.

Output is a versioned JSON document (default), CSV rows or a plain table.
Exit status: 0 all pass, 1 some residual failed, 2 usage or validation
error (including kernel obstructions), 3 numerical non-convergence.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import geodesic as geo
from . import green, hypersurface, mass, spectrum
from .axial import axial_reports, flat_radial_identity
from .errors import (
    ChartError,
    ConvergenceError,
    DegreeCapError,
    DomainError,
    InexactDivisionError,
    KernelObstruction,
    PoleError,
)
from .reports import ResidualReport
from .surfaces import load_surface

SCHEMA = "spherical-green/1"
THREADS_ENV = "SPHERICAL_GREEN_THREADS"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3

_EXIT_FOR = (
    (ConvergenceError, EXIT_NONCONVERGENCE),
    (InexactDivisionError, EXIT_FAIL),
    (KernelObstruction, EXIT_USAGE),
    (DegreeCapError, EXIT_USAGE),
    (PoleError, EXIT_USAGE),
    (ChartError, EXIT_USAGE),
    (DomainError, EXIT_USAGE),
    (ValueError, EXIT_USAGE),
    (ZeroDivisionError, EXIT_USAGE),
    (OSError, EXIT_USAGE),
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    format: str = "json"
    seed: int = 0
    params: dict = field(default_factory=dict)


def thread_cap():
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def pmap(fn, items):
    """Ordered map, fanned out over at most ``SPHERICAL_GREEN_THREADS`` workers."""
    items = list(items)
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# argument helpers


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _rational(text):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational such as 1/4, got {text!r}") from None


def _add_order(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--critical", action="store_true", help="critical operator (order n)")
    g.add_argument("--sigma", type=float, help="fractional order 2*sigma")
    g.add_argument("--k", type=int, help="integer order 2k")


def _order(args):
    if args.critical:
        return spectrum.OperatorOrder.critical()
    if args.k is not None:
        return spectrum.OperatorOrder.integer(args.k)
    return spectrum.OperatorOrder.fractional(args.sigma)


# --------------------------------------------------------------------------
# subcommands; each returns (reports, extra)


def cmd_constants(args, cfg):
    spec = green.GreenSpec(args.n, _order(args))
    if spec.is_critical:
        a, b = green.const_critical(spec.n), green.const_critical_alt(spec.n)
        name = "const_critical"
    else:
        a, b = green.const_power(spec.n, spec.sigma), green.const_power_alt(spec.n, spec.sigma)
        name = "const_power"
    rep = ResidualReport.check(name, a, b, args.rtol * abs(b), n=spec.n, order=spec.order.label())
    return [rep], {"constant": a, "alternate": b, "relative_residual": abs(a - b) / abs(b)}


def cmd_green_verify(args, cfg):
    spec = green.GreenSpec(args.n, _order(args))
    if args.near_pole_guard is not None and not spec.is_critical:
        spectrum.validate_sigma(spec.n, spec.sigma, args.near_pole_guard)
    ks = list(range(spec.first_degree, args.kmax + 1))
    reports = pmap(lambda k: green.coefficient_match(spec, k, args.tol), ks)

    def oracle(k):
        if spec.is_critical:
            closed, quad = green.moment_closed_log(spec.n, k), green.moment_quad_log(spec.n, k)
        else:
            closed = green.moment_closed_pow(spec.n, spec.sigma, k)
            quad = green.moment_quad_pow(spec.n, spec.sigma, k)
        return ResidualReport.check(
            "moment_oracle", abs(quad - closed), 0.0, args.quad_tol, n=spec.n, order=spec.order.label(), k=k
        )

    reports += pmap(oracle, ks)
    scfg = green.SeriesConfig(args.K, args.acceleration, args.series_tol, args.levels)
    xs = args.x
    results = pmap(lambda x: green.series_partial(spec, x, scfg), xs)
    if spec.is_critical:
        # only differences are meaningful: the additive constant is free
        x0, s0 = xs[0], results[0].value
        for x, res in zip(xs[1:], results[1:]):
            closed = green.green_closed_inner(spec, x) - green.green_closed_inner(spec, x0)
            reports.append(
                ResidualReport.check(
                    "series_difference",
                    abs((res.value - s0) - closed),
                    0.0,
                    args.series_tol,
                    n=spec.n,
                    order=spec.order.label(),
                    x=x,
                    x_ref=x0,
                    K=res.terms,
                    levels=green.cesaro_levels(spec, scfg),
                    error_estimate=res.error_estimate,
                )
            )
    else:
        for x, res in zip(xs, results):
            closed = green.green_closed_inner(spec, x)
            reports.append(
                ResidualReport.check(
                    "series_vs_closed",
                    abs(res.value - closed),
                    0.0,
                    args.series_tol,
                    n=spec.n,
                    order=spec.order.label(),
                    x=x,
                    K=res.terms,
                    levels=green.cesaro_levels(spec, scfg),
                    error_estimate=res.error_estimate,
                )
            )
    return reports, {"series": [{"x": x, "value": r.value, "error_estimate": r.error_estimate} for x, r in zip(xs, results)]}


def cmd_axial(args, cfg):
    if args.n < 2 or args.n % 2:
        raise DomainError("the axial identities need an even n >= 2")
    return axial_reports(args.n, args.kmax), {}


def cmd_flat_identity(args, cfg):
    if args.n < 2 or args.n % 2:
        raise DomainError("the flat radial identity needs an even n >= 2")
    residual = flat_radial_identity(args.n)
    rep = ResidualReport.exact("flat_radial_identity", Fraction(int(not residual.is_zero())), 0, n=args.n)
    return [rep], {"residual": str(residual)}


def _grid(S, count, seed):
    rng = np.random.default_rng(seed)
    rad = 0.5 * min(S.radius, 1.0)
    g = rng.standard_normal((count, S.dim))
    g /= np.linalg.norm(g, axis=1)[:, None]
    u = rng.uniform(0.01, 1.0, count) ** (1.0 / S.dim)
    return g * (rad * u)[:, None]


def _directions(dim, count, seed):
    rng = np.random.default_rng(seed + 1)
    out = [np.eye(dim)[i] for i in range(min(dim, count))]
    while len(out) < count:
        v = rng.standard_normal(dim)
        out.append(v / np.linalg.norm(v))
    return out


def _sup_report(name, values, points, tol, **meta):
    vals = np.abs(np.asarray(values, dtype=float))
    i = int(np.argmax(vals))
    return ResidualReport.check(name, float(vals[i]), 0.0, tol, worst_x=points[i].tolist(), points=len(vals), **meta)


def cmd_surface(args, cfg):
    S = load_surface(args.surface)
    pts = _grid(S, args.points, cfg.seed)
    suites = ("green", "identities", "rays") if args.suite == "all" else (args.suite,)
    reports = []
    if "green" in suites:
        if S.dim == 2:
            c = args.c if args.c is not None else (np.trace(S.hessian_at_base()) / 2.0) ** 2
            vals = pmap(lambda x: hypersurface.green_residual_surface(S, x, c), pts)
            reports.append(_sup_report("green_residual_surface", vals, pts, args.tol, surface=S.name, c=float(c)))
        elif S.dim >= 3:
            vals = pmap(lambda x: hypersurface.green_residual_conformal(S, x), pts)
            reports.append(_sup_report("green_residual_conformal", vals, pts, args.tol, surface=S.name))
        else:
            raise DomainError("Green residuals need dim >= 2")
    if "identities" in suites:
        pairs = pmap(lambda x: hypersurface.identity_residuals(S, x), pts)
        for j, name in enumerate(("grad_rho_identity", "laplace_rho_identity")):
            vals = [p[j].value for p in pairs]
            reports.append(_sup_report(name, vals, pts, pairs[0][j].tolerance, surface=S.name))
        fd = [p[1].metadata["fd_residual"] for p in pairs]
        tol = pairs[0][1].metadata["fd_tolerance"]
        reports.append(_sup_report("laplace_rho_identity_fd", fd, pts, tol, surface=S.name))
    if "rays" in suites:
        dirs = _directions(S.dim, args.directions, cfg.seed)
        for v, lim in zip(dirs, pmap(lambda v: hypersurface.ray_limits(S, v), dirs)):
            reports.append(
                ResidualReport.check(
                    "ray_limits",
                    lim.residual,
                    0.0,
                    args.ray_tol,
                    surface=S.name,
                    v=v.tolist(),
                    values=list(lim.values),
                    targets=list(lim.targets),
                )
            )
    return reports, {"surface": S.to_json()}


def cmd_mass(args, cfg):
    S = load_surface(args.surface)
    rot = mass.random_rotation(S.dim, cfg.seed) if args.rotate else None
    fit = mass.decay_fit(S, args.radii, args.order, rot)
    meta = {"surface": S.name, "dim": S.dim, "order": args.order}
    reports = []
    if fit.exact_zero:
        reports.append(ResidualReport.check("mass_values", max(abs(m) for m in fit.masses), 0.0, mass.ZERO_FLOOR, **meta))
    else:
        if fit.predicted_exponent is not None:
            reports.append(
                ResidualReport.check("mass_decay_exponent", fit.exponent, fit.predicted_exponent, args.exp_tol, **meta)
            )
        reports.append(ResidualReport.check("mass_extrapolated", fit.extrapolated_mass, 0.0, args.mass_tol, **meta))
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(mass.mass_csv([(r, m, args.order) for r, m in zip(fit.radii, fit.masses)]))
    extra = {
        "radii": list(fit.radii),
        "masses": list(fit.masses),
        "exponent": fit.exponent,
        "extrapolated_mass": fit.extrapolated_mass,
        "monotone": fit.monotone,
        "exact_zero": fit.exact_zero,
        "notes": list(fit.notes),
    }
    return reports, extra


def cmd_geodesic(args, cfg):
    S = load_surface(args.surface)
    dirs = args.v or [[1.0] + [0.0] * (S.dim - 1)]
    vs = []
    for v in dirs:
        v = np.asarray(v, dtype=float)
        if v.shape != (S.dim,) or not np.linalg.norm(v) > 0:
            raise DomainError(f"direction must be a nonzero vector in R^{S.dim}")
        vs.append(v / np.linalg.norm(v))
    cuts = (args.r_max / 4.0, args.r_max / 2.0, args.r_max)

    def one(v):
        trace = geo.geodesic_shoot(S, v, args.r_max, args.samples)
        return trace, geo.chord_expansion_check(S, v, args.tol, args.samples, cuts, trace)

    out = pmap(one, vs)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(geo.trace_csv(out[0][0]))
    return [rep for _, rep in out], {"surface": S.to_json()}


def _residual_value(r):
    """Rational residuals as they are; elements of Q(sqrt d) as a 0/1 nonzero flag."""
    if isinstance(r, hypersurface.QuadExt):
        return Fraction(int(not r.is_zero()))
    return Fraction(r)


def cmd_series_rigidity(args, cfg):
    coeffs = hypersurface.series_rigidity_solve(args.c0, args.N)
    reports = []
    if hypersurface.rational_sqrt(4 * args.c0) is not None:
        oracle = hypersurface.sphere_series_oracle(args.c0, args.N)
        for m, (a, b) in enumerate(zip(coeffs, oracle), start=1):
            reports.append(ResidualReport.exact("series_coefficient", Fraction(a), b, c0=args.c0, m=m))
    for deg, r in enumerate(hypersurface.series_back_substitution(args.c0, coeffs)):
        reports.append(ResidualReport.exact("back_substitution", _residual_value(r), 0, c0=args.c0, degree=deg))
    return reports, {"coefficients": [str(a) for a in coeffs]}


def cmd_kernel(args, cfg):
    order = _order(args)
    status = spectrum.kernel_status(args.n, order)
    factors = spectrum.kernel_factors(args.n, order.k) if order.kind == "integer" else []
    if status is spectrum.KernelStatus.NONTRIVIAL:
        raise KernelObstruction(
            f"kernel obstruction: {status.value} for n={args.n}, {order.label()} "
            f"(factor i kills degree j for (i, j) in {factors})"
        )
    rep = ResidualReport.exact("kernel_status", Fraction(0), 0, n=args.n, order=order.label(), status=status.value)
    return [rep], {"status": status.value, "factors": [list(f) for f in factors]}


# --------------------------------------------------------------------------
# parser and output


def build_parser():
    p = argparse.ArgumentParser(prog="spherical-green", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized grids and rotations")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("constants", help="Green function constants by two closed forms")
    s.add_argument("--n", type=int, required=True)
    _add_order(s)
    s.add_argument("--rtol", type=float, default=1e-12)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("green-verify", help="coefficient matching and series versus closed form")
    s.add_argument("--n", type=int, required=True)
    _add_order(s)
    s.add_argument("--kmax", type=int, default=10)
    s.add_argument("--x", type=_floats, default=[0.0, 0.5, 1.0], help="comma-separated points x = -P.Q")
    s.add_argument("--K", type=int, default=5000, help="series truncation")
    s.add_argument("--levels", type=int, default=3, help="Cesaro levels")
    s.add_argument("--acceleration", choices=[a.value for a in green.Acceleration], default="cesaro")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--quad-tol", type=float, default=1e-10)
    s.add_argument("--series-tol", type=float, default=1e-3)
    s.add_argument(
        "--near-pole-guard",
        type=float,
        nargs="?",
        const=1e-3,
        default=None,
        help="reject sigma within TOL (default 1e-3) of n/2 + {0,1,...}",
    )
    s.set_defaults(func=cmd_green_verify)

    s = sub.add_parser("axial", help="exact axial orthogonality and eigenvalue identities")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--kmax", type=int, default=8)
    s.set_defaults(func=cmd_axial)

    s = sub.add_parser("flat-identity", help="exact flat radial identity")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_flat_identity)

    s = sub.add_parser("surface", help="Green residuals, distance identities and ray limits on a graph")
    s.add_argument("surface", help="surface JSON file")
    s.add_argument("--suite", choices=("green", "identities", "rays", "all"), default="all")
    s.add_argument("--points", type=int, default=100)
    s.add_argument("--directions", type=int, default=5)
    s.add_argument("--c", type=float, default=None, help="constant in the 2-d residual (default H(0)^2/4)")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--ray-tol", type=float, default=1e-6)
    s.set_defaults(func=cmd_surface)

    s = sub.add_parser("mass", help="mass of the inverted metric and its decay")
    s.add_argument("surface")
    s.add_argument("--radii", type=_floats, default=[20.0, 40.0, 80.0, 160.0])
    s.add_argument("--order", type=int, default=32)
    s.add_argument("--rotate", action="store_true", help="rotate the sphere rule (uses --seed)")
    s.add_argument("--exp-tol", type=float, default=0.3)
    s.add_argument("--mass-tol", type=float, default=1e-4)
    s.add_argument("--trace", help="write r,m_hat,quad_order CSV here")
    s.set_defaults(func=cmd_mass)

    s = sub.add_parser("geodesic", help="chord expansion along geodesics from the base point")
    s.add_argument("surface")
    s.add_argument("--v", type=_floats, action="append", help="direction, repeatable")
    s.add_argument("--r-max", type=float, default=0.2)
    s.add_argument("--samples", type=int, default=4096)
    s.add_argument("--tol", type=float, default=1e-4)
    s.add_argument("--trace", help="write r,rho CSV of the first direction here")
    s.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("series-rigidity", help="exact power-series solution of the rigidity equation")
    s.add_argument("--c0", type=_rational, required=True)
    s.add_argument("--N", type=int, default=8)
    s.set_defaults(func=cmd_series_rigidity)

    s = sub.add_parser("kernel", help="kernel of the conformal operator of a given order")
    s.add_argument("--n", type=int, required=True)
    _add_order(s)
    s.set_defaults(func=cmd_kernel)
    return p


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, np.generic):
        return _clean(v.item())
    return v


def _pretty_value(rep, key):
    v = getattr(rep, key)
    if rep.is_exact:
        q = Fraction(v)
        return f"{q.numerator}/{q.denominator} (exact)"
    return f"{float(v):.10g}"


def render(cfg, reports, extra):
    passed = all(r.passed for r in reports)
    if cfg.format == "json":
        doc = {
            "schema": SCHEMA,
            "command": cfg.command,
            "config": {"seed": cfg.seed, "params": cfg.params},
            "pass": passed,
            "reports": [r.to_dict() for r in reports],
            "extra": extra,
        }
        return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value", "target", "pass", "params"])
        for r in reports:
            d = r.to_dict()
            w.writerow(
                [d["name"], d.get("rational", d["value"]), d.get("target_rational", d["target"]), d["pass"],
                 json.dumps(_clean(d["params"]), sort_keys=True, separators=(",", ":"))]
            )
        return buf.getvalue()
    lines = []
    for r in reports:
        params = " ".join(f"{k}={_clean(v)}" for k, v in sorted(r.metadata.items()) if not isinstance(v, (list, dict)))
        lines.append(
            f"{'PASS' if r.passed else 'FAIL'}  {r.name:<24} {_pretty_value(r, 'value'):>24}  "
            f"target {_pretty_value(r, 'target')}  {params}"
        )
    for k, v in extra.items():
        if not isinstance(v, (list, dict)):
            lines.append(f"{k}: {_clean(v)}")
    lines.append(f"{'all pass' if passed else 'FAILED'} ({sum(r.passed for r in reports)}/{len(reports)})")
    return "\n".join(lines) + "\n"


def _error_exit(cfg, exc, code, out, err):
    if cfg.format == "json":
        doc = {
            "schema": SCHEMA,
            "command": cfg.command,
            "error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code},
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        err.write(f"error ({type(exc).__name__}): {exc}\n")
    return code


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    params = {k: _clean(v) for k, v in sorted(vars(args).items()) if k not in ("func", "format", "seed", "command")}
    cfg = RunConfig(args.command, args.format, args.seed, params)
    try:
        thread_cap()
        reports, extra = args.func(args, cfg)
    except UsageError as exc:
        return _error_exit(cfg, exc, EXIT_USAGE, out, err)
    except Exception as exc:
        for kind, code in _EXIT_FOR:
            if isinstance(exc, kind):
                return _error_exit(cfg, exc, code, out, err)
        raise
    out.write(render(cfg, reports, extra))
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
