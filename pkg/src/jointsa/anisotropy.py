"""Degree of polarization, wave entropy and wave-polarization anisotropy.

DoP extrema over transmit polarizations are found by a Fibonacci-lattice
scan of the Poincare sphere followed by Nelder-Mead refinement from the best
lattice seeds, in local tangent-plane coordinates of each seed.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import DegeneratePixelError, InvalidArgumentError
from .polarimetry import kennaugh_from_covariance

log = logging.getLogger(__name__)

LN2 = np.log(2.0)
N_LATTICE = 2048
N_SEEDS = 4


@lru_cache(maxsize=8)
def fibonacci_lattice(n=N_LATTICE):
    """``n`` near-uniform unit vectors on the sphere, shape (n, 3)."""
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(1.0 - z * z)
    phi = i * np.pi * (3.0 - np.sqrt(5.0))
    lat = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    lat.setflags(write=False)
    return lat


@dataclass(frozen=True)
class DoPExtrema:
    dop_min: float
    dop_max: float
    s_min: np.ndarray
    s_max: np.ndarray


def _as_kennaugh(k):
    k = np.asarray(k, dtype=float)
    if k.shape != (4, 4):
        raise InvalidArgumentError(f"Kennaugh matrix must be 4x4, got {k.shape}")
    return k


def dop(k, s):
    """Degree of polarization of the wave scattered for transmit Stokes ``[1, s]``."""
    k = _as_kennaugh(k)
    s = np.asarray(s, dtype=float)
    if abs(np.linalg.norm(s) - 1.0) > 1e-12:
        raise InvalidArgumentError("transmit polarization must be a unit 3-vector")
    g = k @ np.concatenate([[1.0], s])
    if not g[0] > 0:
        raise DegeneratePixelError("non-positive scattered intensity")
    d = np.linalg.norm(g[1:]) / g[0]
    if d > 1.0 + 1e-9:
        raise InvalidArgumentError(f"non-physical Kennaugh matrix (DoP = {d})")
    return float(min(d, 1.0))


def dop_extrema(k):
    k = _as_kennaugh(k)
    if not k[0, 0] > 0:
        raise DegeneratePixelError("K[0][0] must be positive")
    dmin, dmax, smin, smax, status = kernels.dop_extrema(k[None], fibonacci_lattice(), N_SEEDS)
    if status[0] != kernels.OK:
        raise DegeneratePixelError("zero scattered intensity for some transmit polarization")
    return DoPExtrema(float(dmin[0]), float(dmax[0]), smin[0], smax[0])


def wave_entropy(x):
    """``-ln s(x)`` with ``s(x) = 1/2 (1+x)^((1+x)/2) (1-x)^((1-x)/2)``.

    Vectorized; inputs outside [0, 1] by more than 1e-9 are rejected.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x < -1e-9) | (x > 1.0 + 1e-9)) or np.any(np.isnan(x)):
        raise InvalidArgumentError("DoP must lie in [0, 1]")
    x = np.clip(x, 0.0, 1.0)
    a = 1.0 + x
    b = 1.0 - x
    with np.errstate(divide="ignore", invalid="ignore"):
        tb = np.where(b > 1e-300, 0.5 * b * np.log(np.where(b > 1e-300, b, 1.0)), 0.0)
    out = LN2 - 0.5 * a * np.log(a) - tb
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def wave_entropy_normalized(x):
    out = np.asarray(wave_entropy(x)) / LN2
    return float(out) if out.ndim == 0 else out


def delta_s(k):
    """Normalized anisotropy ``Sn(DoP_min) - Sn(DoP_max)`` of one Kennaugh matrix."""
    ext = dop_extrema(k)
    return max(0.0, wave_entropy_normalized(ext.dop_min) - wave_entropy_normalized(ext.dop_max))


def delta_s_stack(kstack):
    """Anisotropy for a Kennaugh stack (N, 4, 4).

    Degenerate pixels get 0; returns ``(values, n_degenerate)``.
    """
    kstack = np.asarray(kstack, dtype=float).reshape(-1, 4, 4)
    out = np.zeros(kstack.shape[0])
    live = kstack[:, 0, 0] > 0
    idx = np.nonzero(live)[0]
    n_bad = int((~live).sum())
    if idx.size:
        dmin, dmax, _, _, status = kernels.dop_extrema(kstack[idx], fibonacci_lattice(), N_SEEDS)
        ok = status == kernels.OK
        val = wave_entropy_normalized(dmin) - wave_entropy_normalized(dmax)
        out[idx] = np.where(ok, np.maximum(val, 0.0), 0.0)
        n_bad += int((~ok).sum())
    return out, n_bad


def delta_s_field(cfield):
    """Anisotropy map (H, W) of a covariance field; returns ``(map, n_degenerate)``."""
    K = kennaugh_from_covariance(cfield.data)
    vals, n_bad = delta_s_stack(K.reshape(-1, 4, 4))
    if n_bad:
        log.warning("%d degenerate pixels set to zero anisotropy", n_bad)
    return vals.reshape(cfield.height, cfield.width), n_bad
