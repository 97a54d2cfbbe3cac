"""Optional numba acceleration.

Set ``MIMOME_DISABLE_NUMBA=1`` to force the pure-numpy code paths even when
numba is installed.
"""
import os

_disabled = os.environ.get("MIMOME_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError("numba disabled by MIMOME_DISABLE_NUMBA")
    import numba
    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(fn):
        return fn

    return wrap
