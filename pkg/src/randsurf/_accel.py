"""Optional numba acceleration.

Set ``RANDSURF_DISABLE_NUMBA=1`` to force the pure numpy/python kernels.
When numba is not importable the fallback is used automatically.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

_flag = os.environ.get("RANDSURF_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag not in ("", "0", "false", "no")
HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def njit(func):
    """Compile ``func`` with numba when available, else return it untouched."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def resolve_backend(backend=None):
    """Map ``None``/"auto"/"numba"/"numpy" to a concrete backend name."""
    if backend in (None, "auto"):
        return "numba" if USE_NUMBA else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return "numba"
    if backend == "numpy":
        return "numpy"
    raise ValueError(f"unknown backend {backend!r}")
