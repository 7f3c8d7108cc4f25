"""
Numba switch.

Kernels are written as plain Python on scalars and arrays so that they run
unchanged when numba is missing or disabled. Set ``PERTURBKL_DISABLE_NUMBA=1``
to force the pure Python / numpy path.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None
NUMBA_ENABLED = NUMBA_AVAILABLE and os.environ.get(
    "PERTURBKL_DISABLE_NUMBA", ""
).lower() not in ("1", "true", "yes", "on")


def jit(func):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(func)
    return func
