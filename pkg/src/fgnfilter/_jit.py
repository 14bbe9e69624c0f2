"""Optional numba acceleration.

Set ``FGNFILTER_DISABLE_NUMBA=1`` to force the vectorized numpy kernels even
when numba is importable. The flag is read once, at import time.
"""
import os

_disabled = os.environ.get("FGNFILTER_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
}

try:
    if _disabled:
        raise ImportError("numba disabled by FGNFILTER_DISABLE_NUMBA")
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        # bare @njit and @njit(...) both return the plain function
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(func):
            return func

        return wrapper


BACKEND = "numba" if NUMBA_AVAILABLE else "numpy"
