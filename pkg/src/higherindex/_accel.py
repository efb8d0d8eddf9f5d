"""Backend selection for the hot numeric kernels.

Every kernel in the package exists twice: an ``@njit`` version and a plain
numpy version with the same signature.  ``HIGHERINDEX_BACKEND`` picks one at
import time (``numba`` by default when numba imports, ``numpy`` otherwise).
"""
import os

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAVE_NUMBA = False


def _requested_backend():
    name = os.environ.get("HIGHERINDEX_BACKEND", "").strip().lower()
    if name in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(f"HIGHERINDEX_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("HIGHERINDEX_BACKEND=numba but numba is not installed")
    return name


BACKEND = _requested_backend()


def njit(func):
    """Compile with numba when available; the Python function is kept as ``.py_func``."""
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(cache=True)(func)


def pick(numba_impl, numpy_impl, backend=None):
    """Return the implementation for ``backend`` (default: the active one)."""
    backend = backend or BACKEND
    return numba_impl if backend == "numba" else numpy_impl
