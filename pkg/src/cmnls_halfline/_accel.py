"""Numba switch.

Set ``CMNLS_PURE_NUMPY=1`` before import to force the pure-numpy code paths
(useful for debugging and for the benchmark in ``benchmarks/``).
"""

import os

PURE_NUMPY = os.environ.get("CMNLS_PURE_NUMPY", "").strip().lower() in ("1", "true", "yes")

try:
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

USE_NUMBA = (_numba is not None) and not PURE_NUMPY


def njit(fn):
    """``numba.njit(cache=True, nogil=True)`` when available, identity otherwise."""
    if USE_NUMBA:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn
