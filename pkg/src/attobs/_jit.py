"""Optional numba acceleration for the hot simulation kernels.

Set ATTOBS_DISABLE_NUMBA=1 to run the same kernels as plain Python /
numpy (slow, but handy for debugging and as a reference path). When
numba is active, the interpreted fallback of a kernel is still
reachable through its ``py_func`` attribute.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dep, but degrade gracefully
    numba = None

NUMBA_ENABLED = numba is not None and os.environ.get(
    "ATTOBS_DISABLE_NUMBA", ""
).lower() not in ("1", "true", "yes")


def jit_kernel(fn):
    """Compile fn with numba when enabled, otherwise return it unchanged."""
    if NUMBA_ENABLED:
        return numba.njit(fn, cache=True, fastmath=False)
    return fn


def kernel_py_func(fn):
    """Return the interpreted version of a (possibly jitted) kernel."""
    return getattr(fn, "py_func", fn)
