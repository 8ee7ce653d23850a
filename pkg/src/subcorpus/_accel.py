"""Numba switch.

Set ``SUBCORPUS_DISABLE_NUMBA=1`` before import to run every kernel through
its pure-numpy fallback (useful for debugging and for platforms without
numba wheels).
"""
import os

_disabled = os.environ.get("SUBCORPUS_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError("disabled by SUBCORPUS_DISABLE_NUMBA")
    from numba import njit as _njit

    NUMBA_ENABLED = True
except ImportError:
    _njit = None
    NUMBA_ENABLED = False


def jit(fn):
    """``numba.njit(cache=True)`` when numba is active, identity otherwise."""
    if NUMBA_ENABLED:
        return _njit(cache=True)(fn)
    return fn


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
