"""Hot per-pixel kernels with a numba path and a pure-numpy fallback.

The active backend defaults to numba (see :mod:`jointsa._accel`).  Use
:func:`use_backend` to switch, e.g. in tests or benchmarks::

    with use_backend("numpy"):
        ...
"""
from contextlib import contextmanager

import numpy as np

from .. import _accel
from . import _numpy

OK = _numpy.OK
DEGENERATE = _numpy.DEGENERATE

_state = {"name": _accel.default_backend()}


def _module(name):
    if name == "numba":
        from . import _numba

        return _numba
    if name == "numpy":
        return _numpy
    raise ValueError(f"unknown backend {name!r}")


def backend():
    """Name of the active backend, ``"numba"`` or ``"numpy"``."""
    return _state["name"]


def set_backend(name):
    if name == "numba" and not _accel.HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _module(name)
    _state["name"] = name


@contextmanager
def use_backend(name):
    prev = _state["name"]
    set_backend(name)
    try:
        yield
    finally:
        _state["name"] = prev


def set_workers(n):
    """Thread count for the parallel numba kernels (no-op for numpy).

    Requests above the available thread pool are capped; returns the count
    actually set, or ``None`` without numba.
    """
    if not (_accel.HAVE_NUMBA and n):
        return None
    import numba

    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def box_sum(a, half):
    """Sum over clipped ``(2*half+1)``-square windows of an (H, W, F) array."""
    a = np.ascontiguousarray(a)
    return _module(backend()).box_sum(a, int(half))


def box_count(height, width, half):
    """Number of in-bounds pixels in each clipped window."""
    rows = np.arange(height)
    cols = np.arange(width)
    nr = np.minimum(rows + half, height - 1) - np.maximum(rows - half, 0) + 1
    nc = np.minimum(cols + half, width - 1) - np.maximum(cols - half, 0) + 1
    return np.outer(nr, nc).astype(np.float64)


def yamaguchi4(c):
    """Four-component powers for a stack of covariances (N, 3, 3) -> (N, 4)."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    return _module(backend()).yamaguchi4(c)


def dop_extrema(K, lattice, n_seeds=4, step=0.05, maxit=200, ftol=1e-13,
                xtol=1e-7):
    """DoP extrema for Kennaugh stacks (N, 4, 4).

    Returns ``(dop_min, dop_max, s_min, s_max, status)``.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    lattice = np.ascontiguousarray(lattice, dtype=np.float64)
    return _module(backend()).dop_extrema(K, lattice, int(n_seeds),
                                          float(step), int(maxit),
                                          float(ftol), float(xtol))
