"""Scattering matrices, target vectors, covariance/coherency, Kennaugh matrices.

Conventions
-----------
* Lexicographic target vector ``k = [S_hh, sqrt(2) S_hv, S_vv]`` (reciprocal
  medium, ``S_vh = S_hv``).  Covariance ``C = <k k^H>``.
* Coherency ``T = U C U^H`` with the Pauli change of basis
  ``U = [[1, 0, 1], [1, 0, -1], [0, sqrt(2), 0]] / sqrt(2)``.
* Stokes vector ``g = [|Eh|^2 + |Ev|^2, |Eh|^2 - |Ev|^2, 2 Re(Eh Ev*),
  -2 Im(Eh Ev*)]``.  The Kennaugh matrix is
  ``K = diag(1, 1, 1, -1) A (S kron S*) A^-1`` with ``A`` the coherency-to-
  Stokes map, so scattered Stokes ``g' = K [1, s]`` for a unit transmit
  Stokes direction ``s``.  K is linear in the second-order moments, hence
  the windowed mean of single-look K equals K built from windowed C.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError

SQRT2 = np.sqrt(2.0)

PAULI_U = np.array([[1.0, 0.0, 1.0],
                    [1.0, 0.0, -1.0],
                    [0.0, SQRT2, 0.0]], dtype=np.complex128) / SQRT2

_STOKES_A = np.array([[1, 0, 0, 1],
                      [1, 0, 0, -1],
                      [0, 1, 1, 0],
                      [0, 1j, -1j, 0]], dtype=np.complex128)
_STOKES_A_INV = np.linalg.inv(_STOKES_A)
_BSA = np.diag([1.0, 1.0, 1.0, -1.0])


@dataclass(frozen=True)
class ScatteringMatrix:
    s_hh: complex
    s_hv: complex
    s_vv: complex

    def __post_init__(self):
        for name in ("s_hh", "s_hv", "s_vv"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise InvalidArgumentError(f"{name} is not finite: {v}")
            object.__setattr__(self, name, v)

    def as_matrix(self):
        return np.array([[self.s_hh, self.s_hv], [self.s_hv, self.s_vv]])


@dataclass
class PolImage:
    """Quad-pol image stored channel-planar, each (height, width) complex."""

    hh: np.ndarray
    hv: np.ndarray
    vv: np.ndarray

    def __post_init__(self):
        self.hh = np.asarray(self.hh, dtype=np.complex128)
        self.hv = np.asarray(self.hv, dtype=np.complex128)
        self.vv = np.asarray(self.vv, dtype=np.complex128)
        if self.hh.ndim != 2 or self.hh.shape != self.hv.shape or self.hh.shape != self.vv.shape:
            raise InvalidArgumentError("channels must be 2-D arrays of equal shape")
        if min(self.hh.shape) < 1:
            raise InvalidArgumentError("image must be at least 1x1")

    @property
    def height(self):
        return self.hh.shape[0]

    @property
    def width(self):
        return self.hh.shape[1]

    @property
    def shape(self):
        return self.hh.shape

    @classmethod
    def from_lex(cls, k):
        """Build from lexicographic vectors of shape (H, W, 3)."""
        k = np.asarray(k)
        return cls(k[..., 0], k[..., 1] / SQRT2, k[..., 2])

    @classmethod
    def constant(cls, s, height, width):
        return cls(np.full((height, width), s.s_hh), np.full((height, width), s.s_hv),
                   np.full((height, width), s.s_vv))

    def pixel(self, x, y):
        return ScatteringMatrix(self.hh[y, x], self.hv[y, x], self.vv[y, x])

    def lex(self):
        return np.stack([self.hh, SQRT2 * self.hv, self.vv], axis=-1)


@dataclass
class HermitianField:
    """Per-pixel 3x3 Hermitian matrices, ``data`` shaped (H, W, 3, 3)."""

    data: np.ndarray
    kind: str = "covariance"
    window: int = 1

    def __post_init__(self):
        if self.kind not in ("covariance", "coherency"):
            raise InvalidArgumentError(f"unknown field kind {self.kind!r}")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def trace(self):
        return np.einsum("...ii->...", self.data).real

    def flat(self):
        return self.data.reshape(-1, 3, 3)


def lex_vector(s):
    return np.array([s.s_hh, SQRT2 * s.s_hv, s.s_vv], dtype=np.complex128)


def span(s):
    return abs(s.s_hh) ** 2 + 2.0 * abs(s.s_hv) ** 2 + abs(s.s_vv) ** 2


def span_image(img):
    return np.abs(img.hh) ** 2 + 2.0 * np.abs(img.hv) ** 2 + np.abs(img.vv) ** 2


def check_window(window, height=None, width=None):
    if int(window) != window or window < 1 or window % 2 == 0:
        raise InvalidArgumentError(f"window must be a positive odd integer, got {window}")
    if height is not None and window > min(height, width):
        raise InvalidArgumentError(
            f"window {window} exceeds image size {height}x{width}")
    return int(window)


def boxcar(field, window):
    """Clipped-window boxcar mean of an (H, W, ...) array."""
    half = window // 2
    H, W = field.shape[:2]
    flat = field.reshape(H, W, -1)
    out = kernels.box_sum(flat, half) / kernels.box_count(H, W, half)[:, :, None]
    return out.reshape(field.shape)


def covariance_field(img, window):
    """Boxcar-averaged covariance ``<k k^H>`` with clipped edge windows."""
    window = check_window(window, img.height, img.width)
    k = img.lex()
    outer = k[..., :, None] * k[..., None, :].conj()
    return HermitianField(boxcar(outer, window), "covariance", window)


def coherency_from_covariance(c):
    """``T = U C U^H``; works on a single matrix or any (..., 3, 3) stack."""
    c = np.asarray(c, dtype=np.complex128)
    return PAULI_U @ c @ PAULI_U.conj().T


def coherency_field(cfield):
    return HermitianField(coherency_from_covariance(cfield.data), "coherency",
                          cfield.window)


def kennaugh_from_scattering(s):
    S = s.as_matrix() if isinstance(s, ScatteringMatrix) else np.asarray(s)
    W = np.kron(S, S.conj())
    return (_BSA @ _STOKES_A @ W @ _STOKES_A_INV).real


def _covariance_basis():
    """Real linear map from covariance entries to Kennaugh entries."""
    # second moments <S_ij S_kl*> in terms of e = [hh, hv, vv]; C = D R D
    idx = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}
    L = np.zeros((16, 9), dtype=np.complex128)
    d = np.array([1.0, SQRT2, 1.0])
    for p in range(3):
        for q in range(3):
            R = np.zeros((3, 3), dtype=np.complex128)
            R[p, q] = 1.0 / (d[p] * d[q])
            W = np.zeros((4, 4), dtype=np.complex128)
            for i in range(2):
                for j in range(2):
                    for k in range(2):
                        for l in range(2):
                            W[2 * i + k, 2 * j + l] = R[idx[i, j], idx[k, l]]
            L[:, 3 * p + q] = (_BSA @ _STOKES_A @ W @ _STOKES_A_INV).ravel()
    return L


_KENNAUGH_FROM_C = _covariance_basis()


def kennaugh_from_covariance(c):
    """Kennaugh matrix (or stack) from covariance matrix (or stack)."""
    c = np.asarray(c, dtype=np.complex128)
    flat = c.reshape(-1, 9)
    K = (flat @ _KENNAUGH_FROM_C.T).real
    return K.reshape(c.shape[:-2] + (4, 4))


def kennaugh_mean(img, window):
    """Per-pixel windowed mean Kennaugh matrix, (H, W, 4, 4)."""
    return kennaugh_from_covariance(covariance_field(img, window).data)


def pauli_rgb(img, percentile=99.0):
    """8-bit Pauli composite: R=|hh-vv|, G=2|hv|, B=|hh+vv|.

    Each channel is clipped at its own ``percentile`` and mapped to 0..255.
    """
    chans = [np.abs(img.hh - img.vv), 2.0 * np.abs(img.hv), np.abs(img.hh + img.vv)]
    out = np.zeros(img.shape + (3,), dtype=np.uint8)
    for i, ch in enumerate(chans):
        top = np.percentile(ch, percentile)
        if top > 0:
            out[..., i] = np.round(255.0 * np.clip(ch / top, 0.0, 1.0)).astype(np.uint8)
    return out
