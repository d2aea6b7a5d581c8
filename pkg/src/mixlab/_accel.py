"""Optional numba acceleration.

The hot kernels in :mod:`mixlab._kernels` are written as plain numpy loops and
compiled with ``numba.njit`` when available.  Setting the environment variable
``MIXLAB_NUMBA=0`` (or any of ``false``/``no``/``off``) before import selects
the pure-Python fallback path; the fallback consumes the same pre-drawn random
chunks, so trajectories are bit-identical on both paths.
"""

import os

try:
    from numba import njit

    _numba_installed = True
except ImportError:  # pragma: no cover - exercised via the env-flag path
    _numba_installed = False

_flag = os.environ.get("MIXLAB_NUMBA", "1").strip().lower()
USING_NUMBA = _numba_installed and _flag not in ("0", "false", "no", "off")


def maybe_jit(*args, **kwargs):
    """njit-compile when acceleration is on, otherwise return the function as is."""

    def decorator(func):
        if USING_NUMBA:
            return njit(*args, **kwargs)(func)
        return func

    return decorator
