import csv
import io
import math

import numpy as np
import pytest

from spherical_green.errors import ChartError, DomainError
from spherical_green.geodesic import (
    chord_expansion_check,
    geodesic_shoot,
    geodesic_shoot_many,
    plateau_c4,
    quartic_fit,
    taylor_fit,
    trace_csv,
)
from spherical_green.surfaces import ellipsoid, paraboloid, plane, sphere


@pytest.fixture(scope="module")
def unit_circle_trace():
    return geodesic_shoot(sphere(2), [1.0, 0.0], 1.0, samples=1000)


def test_plane_is_exact():
    tr = geodesic_shoot(plane(3), [0.6, 0.8, 0.0], 0.5, samples=256)
    assert np.array_equal(tr.excess, np.zeros(257))
    assert np.allclose(tr.rho, tr.r**2, rtol=1e-15, atol=0)
    assert quartic_fit(tr, 0.2) == 0.0
    rep = chord_expansion_check(plane(2), [1.0, 0.0], samples=512)
    assert rep.value == 0.0 and rep.passed


def test_great_circle_chord(unit_circle_trace):
    tr = unit_circle_trace
    assert np.max(np.abs(tr.rho - 4 * np.sin(tr.r / 2) ** 2)) <= 1e-8
    assert tr.speed_drift <= 1e-9
    assert tr.step == pytest.approx(1e-3)


def test_chords_never_exceed_arclength(unit_circle_trace):
    tr = unit_circle_trace
    assert np.all(tr.rho <= tr.r**2 + 1e-12)


def test_sphere_geodesic_stays_on_circle(unit_circle_trace):
    # the geodesic through e1 lies in the x1-z plane of the unit sphere
    x = np.array([s.x for s in unit_circle_trace.samples])
    assert np.max(np.abs(x[:, 1])) == 0.0
    assert np.allclose(x[:, 0], np.sin(unit_circle_trace.r), atol=1e-10)


def test_rk4_order():
    S = sphere(2)
    errs = []
    for samples in (16, 32, 64):
        r, excess, _, _ = geodesic_shoot_many(S, [[1.0, 0.0]], 1.0, samples=samples, drift_abort=1.0)
        errs.append(abs(1.0 + excess[0, -1] - 4 * math.sin(0.5) ** 2))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(10 < q < 24 for q in ratios), ratios


def test_step_halving_c4():
    # fit on the coarse grid each time so only the integrator changes
    S = paraboloid([1, 2])
    q = [quartic_fit(geodesic_shoot(S, [0.0, 1.0], 0.2, samples=64 * 2**j).samples[:: 2**j], 0.1) for j in range(3)]
    d1, d2 = q[0] - q[1], q[1] - q[2]
    assert 12 < d1 / d2 < 20
    assert abs(d1) <= 1e-7


def test_taylor_data_recovered(unit_circle_trace):
    a = taylor_fit(unit_circle_trace, 0.5, degree=6)
    assert abs(a[0]) <= 1e-6
    assert abs(2 * a[1] - 2.0) <= 1e-6
    assert abs(a[2]) <= 1e-4


def test_quartic_fit_sphere(unit_circle_trace):
    assert quartic_fit(unit_circle_trace, 0.1) == pytest.approx(-1 / 12, abs=1e-4)


def test_paraboloid_e1_quartic():
    tr = geodesic_shoot(paraboloid([1, 1]), [1.0, 0.0], 0.2, samples=2048)
    c4, _, scan = plateau_c4(tr)
    assert abs(c4 + 1 / 12) <= 1e-4
    # without extrapolation the r^6 term leaves a bias that shrinks with the cut
    assert abs(scan[0] + 1 / 12) < abs(scan[1] + 1 / 12) < abs(scan[2] + 1 / 12)


@pytest.mark.parametrize(
    "S, v, tol",
    [
        (sphere(2), [1.0, 0.0], 1e-4),
        (sphere(2, 2.0), [1.0, 0.0], 1e-4),
        (paraboloid([1, 2]), [1.0, 0.0], 1e-3),
        (paraboloid([1, 2]), [0.0, 1.0], 1e-3),
        (ellipsoid([1, 2], 1), [1.0, 0.0], 1e-3),
        (sphere(3), [0.0, 0.6, 0.8], 1e-4),
    ],
)
def test_chord_expansion(S, v, tol):
    rep = chord_expansion_check(S, v, tol=tol, samples=2048)
    assert rep.passed, rep.metadata
    iivv = float(np.asarray(v) @ S.hessian_at_base() @ np.asarray(v))
    assert rep.metadata["c4_target"] == pytest.approx(-(iivv**2) / 12)


def test_plateau_reports_scan():
    tr = geodesic_shoot(paraboloid([1, 2]), [0.0, 1.0], 0.2, samples=2048)
    c4, cut, scan = plateau_c4(tr)
    assert len(scan) == 3
    assert abs(c4 + 1 / 3) < abs(scan[0] + 1 / 3)
    assert cut is None


def test_batched_matches_single():
    S = ellipsoid([1, 2, 1.5], 1)
    V = np.array([[1.0, 0, 0], [0, 0.6, 0.8]])
    _, excess, _, _ = geodesic_shoot_many(S, V, 0.1, samples=128)
    for row, v in zip(excess, V):
        assert np.array_equal(row, geodesic_shoot(S, v, 0.1, samples=128).excess)


def test_errors():
    with pytest.raises(DomainError):
        geodesic_shoot(sphere(2), [1.0, 1.0], 0.1)
    with pytest.raises(DomainError):
        geodesic_shoot(sphere(2), [1.0, 0.0], 0.0)
    with pytest.raises(ChartError, match="left the chart"):
        geodesic_shoot(paraboloid([1, 1], chart_radius=0.5), [1.0, 0.0], 1.0, samples=256)
    tr = geodesic_shoot(sphere(2), [1.0, 0.0], 0.01, samples=4)
    with pytest.raises(DomainError):
        quartic_fit(tr, 0.01)


def test_trace_csv():
    tr = geodesic_shoot(sphere(2), [1.0, 0.0], 0.1, samples=8)
    rows = list(csv.reader(io.StringIO(trace_csv(tr))))
    assert rows[0] == ["r", "rho"] and len(rows) == 10
    assert float(rows[-1][0]) == pytest.approx(0.1)
    assert float(rows[-1][1]) == pytest.approx(4 * math.sin(0.05) ** 2, rel=1e-9)
