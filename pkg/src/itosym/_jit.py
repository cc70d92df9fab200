"""Optional numba acceleration.

Set ``ITOSYM_DISABLE_NUMBA=1`` to force the pure-numpy code paths.  When
numba is missing ``njit`` is a no-op decorator and ``HAVE_NUMBA`` is false.
"""

import os

DISABLED = os.environ.get("ITOSYM_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError("disabled by ITOSYM_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
