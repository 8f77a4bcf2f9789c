"""Optional numba acceleration.

Set ``SPHERICAL_GREEN_NUMBA=0`` before import to force the pure-numpy
kernels; any other value (or unset) uses numba when it is importable.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    HAVE_NUMBA = False

ENV_FLAG = "SPHERICAL_GREEN_NUMBA"


def numba_requested():
    return os.environ.get(ENV_FLAG, "1").strip().lower() not in ("0", "false", "no", "off")


def jit(func=None, **options):
    """``numba.njit`` when available, otherwise the undecorated function.

    Works both bare (``@jit``) and with options (``@jit(cache=True)``).
    """
    options.setdefault("cache", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return numba.njit(**options)(f)

    if func is not None:
        return wrap(func)
    return wrap
