"""Kernel backend selection.

The hot loops (Monte Carlo path stepping, the finite-volume matvec) have two
implementations: scalar per-path kernels compiled with numba, and vectorized
numpy versions.  ``BARRIER_LAB_BACKEND`` picks one (``numba`` or ``numpy``);
the default is numba when it imports.  Both consume identical random streams,
so results agree to rounding.
"""

import os

# numba's TBB layer warns on older TBB; the workqueue layer is always available
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    import numba as _numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _numba = None
    HAVE_NUMBA = False

ENV_BACKEND = "BARRIER_LAB_BACKEND"
ENV_THREADS = "BARRIER_LAB_THREADS"


def backend():
    """Return the active backend name, ``"numba"`` or ``"numpy"``."""
    name = os.environ.get(ENV_BACKEND, "numba" if HAVE_NUMBA else "numpy")
    name = name.strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"{ENV_BACKEND} must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


def set_threads(n=None):
    """Cap numba's worker threads; ``None`` reads ``BARRIER_LAB_THREADS``."""
    if n is None:
        env = os.environ.get(ENV_THREADS)
        if not env:
            return
        n = int(env)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if HAVE_NUMBA:
        _numba.set_num_threads(min(n, _numba.config.NUMBA_NUM_THREADS))


if HAVE_NUMBA:
    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return _numba.njit(*args, **kwargs)

    prange = _numba.prange
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range
