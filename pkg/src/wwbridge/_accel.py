"""Backend selection for the hot kernels.

``WWB_BACKEND=numpy`` forces the vectorised NumPy code paths even when numba
is importable; ``WWB_BACKEND=numba`` (the default) uses the JIT kernels when
numba is available and silently falls back otherwise.
"""
import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()
REQUESTED = os.environ.get("WWB_BACKEND", "numba").strip().lower()
if REQUESTED not in ("numba", "numpy"):
    raise ValueError(f"WWB_BACKEND must be 'numba' or 'numpy', got {REQUESTED!r}")
USE_NUMBA = HAVE_NUMBA and REQUESTED == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit


def thread_cap() -> int:
    """Parallelism cap from ``WWB_THREADS`` (default: CPU count)."""
    raw = os.environ.get("WWB_THREADS")
    if raw:
        return max(1, int(raw))
    return max(1, os.cpu_count() or 1)
