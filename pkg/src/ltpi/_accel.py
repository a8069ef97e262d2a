"""Backend selection for the compiled kernels.

Set ``LTPI_DISABLE_NUMBA=1`` before import to force the pure-numpy path.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("LTPI_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAS_NUMBA:  # pragma: no cover
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
