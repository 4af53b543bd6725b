"""Four-component power decomposition, surface similarity and roughness angle.

The volume model is chosen from the co-pol ratio ``10 log10(C33 / C11)``:

* below -2 dB: ``(f_v / 15) [[8, 0, 2], [0, 4, 0], [2, 0, 3]]``
* within +-2 dB: ``(f_v / 8) [[3, 0, 1], [0, 2, 0], [1, 0, 3]]``
* above +2 dB: ``(f_v / 15) [[3, 0, 2], [0, 4, 0], [2, 0, 8]]``

Helix power is extracted first, then volume from the cross-pol term, then the
surface and double-bounce powers from the 2x2 co-pol residual, using
``alpha = -1`` when ``Re(residual C13) >= 0`` and ``beta = 1`` otherwise.

Negative powers are clamped: a negative surface or double-bounce power is set
to zero and its deficit taken from the volume power; if the volume power then
goes negative it is zeroed and the other three are rescaled to the trace.
"""
from dataclasses import astuple, dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, UndefinedRoughnessError

SQRT2 = np.sqrt(2.0)

SURFACE_U = np.array([1.0, 0.0, 1.0]) / SQRT2


@dataclass(frozen=True)
class FourComponentPowers:
    p_s: float
    p_d: float
    p_v: float
    p_h: float

    def total(self):
        return self.p_s + self.p_d + self.p_v + self.p_h

    def __iter__(self):
        return iter(astuple(self))


def _check_hermitian_psd(c, tol=1e-9):
    c = np.asarray(c, dtype=np.complex128)
    if c.shape != (3, 3):
        raise InvalidArgumentError(f"expected a 3x3 matrix, got shape {c.shape}")
    scale = max(np.abs(c).max(), np.finfo(float).tiny)
    if np.abs(c - c.conj().T).max() > 1e-12 * scale:
        raise InvalidArgumentError("matrix is not Hermitian")
    tr = np.trace(c).real
    if np.linalg.eigvalsh(c).min() < -tol * max(tr, 0.0) - 1e-300:
        raise InvalidArgumentError("matrix is not positive semi-definite")
    return c


def yamaguchi4(c):
    """Four-component powers of one 3x3 covariance matrix."""
    c = _check_hermitian_psd(c)
    ps, pd, pv, ph = kernels.yamaguchi4(c[None])[0]
    return FourComponentPowers(float(ps), float(pd), float(pv), float(ph))


def yamaguchi4_field(cfield):
    """Powers for a covariance field; returns an (H, W, 4) array [Ps, Pd, Pv, Ph]."""
    H, W = cfield.height, cfield.width
    return kernels.yamaguchi4(cfield.flat()).reshape(H, W, 4)


def helix_power(c):
    """``2 |Im(<S_hh S_hv*> + <S_hv S_vv*>)|``, i.e. ``sqrt(2) |Im(C12 + C23)|``.

    Accepts a single matrix or an (..., 3, 3) stack.
    """
    c = np.asarray(c)
    return SQRT2 * np.abs((c[..., 0, 1] + c[..., 1, 2]).imag)


def surface_similarity_rs(c):
    """Normalized projection of C onto the trihedral mechanism, in [0, 1]."""
    c = np.asarray(c, dtype=np.complex128)
    tr = np.einsum("...ii->...", c).real
    if np.any(tr <= 0):
        raise InvalidArgumentError("surface similarity needs positive power")
    proj = 0.5 * (c[..., 0, 0] + c[..., 2, 2] + 2.0 * c[..., 0, 2]).real
    return np.clip(proj / tr, 0.0, 1.0)


def surface_similarity_field(c):
    """Like :func:`surface_similarity_rs` but zero-power pixels give 0."""
    c = np.asarray(c, dtype=np.complex128)
    tr = np.einsum("...ii->...", c).real
    proj = 0.5 * (c[..., 0, 0] + c[..., 2, 2] + 2.0 * c[..., 0, 2]).real
    with np.errstate(divide="ignore", invalid="ignore"):
        rs = np.where(tr > 0, proj / tr, 0.0)
    return np.clip(rs, 0.0, 1.0)


def _sinc(x):
    return np.where(x == 0, 1.0, np.sin(x) / np.where(x == 0, 1.0, x))


def beta1_from_ratio(ratio, tol=1e-10):
    """Solve ``sinc(4 beta1) = ratio`` on the first monotone branch.

    ``ratio`` in [0, 1]; returns beta1 in degrees, [0, 45].  Vectorized.
    """
    r = np.clip(np.asarray(ratio, dtype=float), 0.0, 1.0)
    lo = np.zeros_like(r)
    hi = np.full_like(r, np.pi)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        above = _sinc(mid) > r
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    x = 0.5 * (lo + hi)
    x = np.where(r >= 1.0, 0.0, np.where(r <= 0.0, np.pi, x))
    return np.degrees(x / 4.0)


def surface_roughness_beta1(t):
    """Sea-surface roughness angle (degrees) from a coherency matrix.

    Ratios below zero (T33 > T22) fall outside the principal branch and are
    clipped to 45 degrees.
    """
    t = np.asarray(t)
    t22 = t[..., 1, 1].real
    t33 = t[..., 2, 2].real
    den = t22 + t33
    if np.any(den <= 0):
        raise UndefinedRoughnessError("T22 + T33 must be positive")
    beta = beta1_from_ratio((t22 - t33) / den)
    return float(beta) if beta.ndim == 0 else beta
