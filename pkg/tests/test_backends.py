import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_gegenbauer

from spherical_green import kernels
from spherical_green.green import GreenSpec, SeriesConfig, series_partial

BACKENDS = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])


@pytest.mark.parametrize("backend", BACKENDS)
def test_table_against_scipy(backend):
    x = np.linspace(-0.99, 0.99, 41)
    with kernels.use_backend(backend):
        for lam in (0.5, 1.0, 2.5):
            table = kernels.gegenbauer_table(lam, 30, x)
            for k in (0, 1, 7, 30):
                assert np.allclose(table[k], eval_gegenbauer(k, lam, x), rtol=1e-12, atol=1e-12)


@given(st.floats(0.25, 4.0), st.integers(1, 60))
def test_table_parity(lam, kmax):
    x = np.linspace(-1.0, 1.0, 17)
    with kernels.use_backend("numpy"):
        a = kernels.gegenbauer_table(lam, kmax, x)
    with kernels.use_backend(BACKENDS[-1]):
        b = kernels.gegenbauer_table(lam, kmax, x)
    # recurrence rounding scales with the sup norm C_k(1), not the local value
    scale = np.maximum(1.0, np.abs(a[:, -1:]))
    assert np.max(np.abs(a - b) / scale) <= 1e-13


@pytest.mark.parametrize("lam, count", [(0.5, 10), (1.5, 40), (2.0, 200)])
def test_nodes_parity(lam, count):
    with kernels.use_backend("numpy"):
        a, fa = kernels.gegenbauer_nodes(lam, count)
    with kernels.use_backend(BACKENDS[-1]):
        b, fb = kernels.gegenbauer_nodes(lam, count)
    assert fa == fb == -1
    assert np.max(np.abs(a - b)) <= 1e-14
    assert np.all(np.diff(a) < 0)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=300), st.integers(0, 5))
def test_cesaro_parity(values, levels):
    p = np.cumsum(values)
    with kernels.use_backend("numpy"):
        a = kernels.cesaro_means(p, levels)
    with kernels.use_backend(BACKENDS[-1]):
        b = kernels.cesaro_means(p, levels)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-9)


def test_compensated_sum_is_accurate():
    vals = np.array([1e16, 1.0, -1e16, 3.0] * 50)
    for backend in BACKENDS:
        with kernels.use_backend(backend):
            assert kernels.compensated_sum(vals) == 200.0
    rng = np.random.default_rng(1)
    v = rng.standard_normal(10_000) * 10.0 ** rng.integers(-8, 8, 10_000)
    for backend in BACKENDS:
        with kernels.use_backend(backend):
            assert kernels.compensated_sum(v) == pytest.approx(math.fsum(v), rel=1e-15, abs=1e-15)


def test_series_parity():
    spec = GreenSpec.power(4, 0.5)
    cfg = SeriesConfig(max_terms=3000)
    vals = []
    for backend in BACKENDS:
        with kernels.use_backend(backend):
            vals.append(series_partial(spec, 0.5, cfg).value)
    assert max(vals) - min(vals) <= 1e-12 * abs(vals[0])


def test_unknown_backend():
    with pytest.raises(ValueError):
        with kernels.use_backend("fortran"):
            pass


def test_env_flag_selects_numpy():
    env = dict(os.environ, SPHERICAL_GREEN_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", "from spherical_green import kernels; print(kernels.BACKEND)"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
