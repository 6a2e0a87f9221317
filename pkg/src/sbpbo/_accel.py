"""Backend switch for the compiled kernels.

Set ``SBPBO_NUMBA=0`` in the environment before import to force the
pure-numpy path. When numba is missing the numpy path is used silently.
"""

import logging
import os

_FLAG = os.environ.get("SBPBO_NUMBA", "1").strip().lower()
_REQUESTED = _FLAG not in ("0", "false", "no", "off")

try:
    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = _REQUESTED and HAVE_NUMBA


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False)(func)
