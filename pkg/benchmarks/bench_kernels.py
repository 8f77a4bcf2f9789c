"""Numba versus pure-numpy timings for the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed on the numba path so compilation (or the
on-disk cache load) is not counted.  Results of the two paths are compared
as a sanity check.
"""

import argparse
import time

import numpy as np

from spherical_green import kernels


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def cases():
    x = np.linspace(-0.999, 0.999, 64)
    partials = np.cumsum((-1.0) ** np.arange(50_000) / np.sqrt(np.arange(1, 50_001)))
    values = np.random.default_rng(0).standard_normal(1_000_000)
    return [
        ("gegenbauer_table  lam=1.5 K=5000 m=64", lambda: kernels.gegenbauer_table(1.5, 5000, x)),
        ("gegenbauer_nodes  lam=2 N=200", lambda: kernels.gegenbauer_nodes(2.0, 200)[0]),
        ("cesaro_means      K=5e4 levels=3", lambda: kernels.cesaro_means(partials, 3)),
        ("compensated_sum   1e6 values", lambda: kernels.compensated_sum(values)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
    print(f"{'kernel':<40}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, fn in cases():
        with kernels.use_backend("numpy"):
            t_np, ref = _best(fn, args.repeat)
        if kernels.HAVE_NUMBA:
            with kernels.use_backend("numba"):
                fn()
                t_nb, out = _best(fn, args.repeat)
            diff = float(np.max(np.abs(np.asarray(out) - np.asarray(ref))))
            print(f"{name:<40}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}{diff:>12.2e}")
        else:
            print(f"{name:<40}{1e3 * t_np:>12.2f}{'-':>12}{'-':>10}{'-':>12}")


if __name__ == "__main__":
    main()
