"""Numba switch.

Set ``ISOFIELD_DISABLE_NUMBA=1`` to force the pure-numpy kernels. When numba
is not importable the numpy path is used automatically.
"""
import os

_DISABLED = os.environ.get("ISOFIELD_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise a no-op decorator.

    The compiled function is always built if numba exists (so benchmarks can
    compare both paths); whether it is *dispatched to* is governed by
    ``USE_NUMBA``.
    """
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f

