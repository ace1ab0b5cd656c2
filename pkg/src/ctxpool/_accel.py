"""Backend selection for the hot kernels.

Set ``CONTEXT_POOL_NUMBA=0`` to force the pure-numpy path.  The flag is read
once at import; tests and the kernel benchmark call the backend-specific
functions in :mod:`ctxpool.kernels` directly instead of toggling it.
"""

import os
import warnings

# an outdated system TBB makes numba fall back to another layer; nothing to act on
warnings.filterwarnings("ignore", message="The TBB threading layer requires")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_flag = os.environ.get("CONTEXT_POOL_NUMBA", "1").strip().lower()

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and _flag not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise."""
    if numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def set_threads(n):
    """Cap numba worker threads; returns the effective count."""
    if numba is None or n is None:
        return 1
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def threads_from_env():
    value = os.environ.get("CONTEXT_POOL_THREADS")
    return int(value) if value else None
