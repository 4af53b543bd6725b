"""Backend selection for the hot kernels.

Numba is used when it imports cleanly, unless the environment variable
``JOINTSA_NUMBA`` is set to ``0`` (or ``false``/``no``/``off``), in which
case the vectorized numpy kernels are used.  The choice is read once at
import time; :func:`jointsa.kernels.use_backend` switches it at runtime.
"""
import os

_FALSY = ("0", "false", "no", "off")


def numba_requested():
    return os.environ.get("JOINTSA_NUMBA", "1").strip().lower() not in _FALSY


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def default_backend():
    return "numba" if (HAVE_NUMBA and numba_requested()) else "numpy"
