"""Backend selection for the compiled kernels.

Set ``DETMATH_DISABLE_NUMBA=1`` to force the pure-numpy path. The numpy path
is also used when numba cannot be imported.
"""

import os

_FLAG = os.environ.get("DETMATH_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("1", "true", "yes", "on")


def njit(fn):
    """``numba.njit(cache=True)`` when available, otherwise the function itself."""
    if not NUMBA_AVAILABLE:
        return fn
    return _njit(cache=True)(fn)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
