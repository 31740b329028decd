"""Backend switch for the hot kernels.

Set ``ENTROCONE_BACKEND=numpy`` to force the pure-numpy path even when numba
is importable. Any other value (or unset) uses numba when available.
"""
from __future__ import annotations

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

BACKEND = os.environ.get("ENTROCONE_BACKEND", "numba").strip().lower()
USE_NUMBA = HAVE_NUMBA and BACKEND != "numpy"


def njit(fn):
    """Compile ``fn`` with numba if it is installed, else return it untouched."""
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
