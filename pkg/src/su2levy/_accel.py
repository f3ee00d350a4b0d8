"""Optional numba acceleration.

Hot kernels are written once as plain Python/numpy loops and compiled with
``numba.njit`` when numba is importable. Set ``SU2LEVY_DISABLE_NUMBA=1`` to
force the pure-numpy fallback (kernels that have a vectorized twin use it;
the rest run as ordinary Python).
"""

import os

_DISABLED = os.environ.get("SU2LEVY_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("numba disabled by SU2LEVY_DISABLE_NUMBA")
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False

NUMBA_OPTS = {"cache": True, "fastmath": False, "nogil": True}


def njit(func):
    """Compile ``func`` with numba if available, else return it unchanged."""
    if HAS_NUMBA:
        return numba.njit(**NUMBA_OPTS)(func)
    return func


def backend_name():
    return "numba" if HAS_NUMBA else "numpy"
