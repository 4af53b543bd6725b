"""Detector maps: joint-SA, DBSP, RsDVH, anisotropy and total power, plus SCR.

All maps share one covariance field per window.  The ring-contrast
covariance ``CP`` used by DBSP and RsDVH is the test-pixel covariance minus
the mean covariance over a square ring around it (Chebyshev distance in
``(guard, guard + width]``), projected onto the PSD cone.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .anisotropy import delta_s_field
from .decomposition import surface_similarity_field, yamaguchi4_field
from .errors import InvalidArgumentError, UndefinedSCRError
from .polarimetry import HermitianField, covariance_field, span_image

log = logging.getLogger(__name__)

DETECTORS = ("joint-sa", "dbsp", "rsdvh", "delta-s", "span")
DEFAULT_WINDOW = 11


@dataclass
class DetectorMap:
    values: np.ndarray
    name: str
    window: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.size == 0:
            raise InvalidArgumentError("detector map must be a nonempty 2-D array")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise InvalidArgumentError("detector values must be finite and >= 0")

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class RegionBox:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1 or self.x < 0 or self.y < 0:
            raise InvalidArgumentError(f"invalid region {self}")

    def check(self, height, width):
        if self.x + self.w > width or self.y + self.h > height:
            raise InvalidArgumentError(f"region {self} exceeds the {width}x{height} image")
        return self

    def slices(self):
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)

    @classmethod
    def parse(cls, text):
        """From ``"x,y,w,h"``."""
        parts = text.split(",")
        if len(parts) != 4:
            raise InvalidArgumentError(f"region must be x,y,w,h, got {text!r}")
        try:
            return cls(*(int(p.strip()) for p in parts))
        except ValueError as e:
            raise InvalidArgumentError(f"region must be integers, got {text!r}") from e


def joint_sa(p, ds):
    """``(Pd + Pv) * Ph * dS`` for one pixel."""
    return (p.p_d + p.p_v) * p.p_h * ds


def _ring_defaults(window, guard, width):
    return (window if guard is None else int(guard),
            window if width is None else int(width))


def _psd_project(c):
    w, v = np.linalg.eigh(c)
    w = np.clip(w, 0.0, None)
    return (v * w[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def cp_matrix(cfield, x, y, guard=None, width=None):
    """Ring-contrast covariance at one pixel; the ring must lie in bounds."""
    g, r = _ring_defaults(cfield.window, guard, width)
    outer = g + r
    if x - outer < 0 or y - outer < 0 or x + outer >= cfield.width or y + outer >= cfield.height:
        raise InvalidArgumentError("background ring extends beyond the image")
    d = cfield.data
    big = d[y - outer:y + outer + 1, x - outer:x + outer + 1].sum(axis=(0, 1))
    small = d[y - g:y + g + 1, x - g:x + g + 1].sum(axis=(0, 1))
    n = (2 * outer + 1) ** 2 - (2 * g + 1) ** 2
    return _psd_project(d[y, x] - (big - small) / n)


def cp_field(cfield, guard=None, width=None):
    """Ring-contrast covariance for every pixel; edge rings are clipped."""
    g, r = _ring_defaults(cfield.window, guard, width)
    if g < 0 or r < 1:
        raise InvalidArgumentError("guard must be >= 0 and ring width >= 1")
    H, W = cfield.height, cfield.width
    flat = cfield.data.reshape(H, W, 9)
    big = kernels.box_sum(flat, g + r)
    small = kernels.box_sum(flat, g)
    n = kernels.box_count(H, W, g + r) - kernels.box_count(H, W, g)
    with np.errstate(invalid="ignore", divide="ignore"):
        ring = np.where(n[..., None] > 0, (big - small) / np.maximum(n, 1.0)[..., None], 0.0)
    cp = _psd_project(cfield.data - ring.reshape(H, W, 3, 3))
    return HermitianField(cp, "covariance", cfield.window)


class Features:
    """Lazily computed per-pixel quantities shared by the detectors."""

    def __init__(self, img, window=DEFAULT_WINDOW, guard=None, ring=None):
        self.img = img
        self.window = window
        self.guard = guard
        self.ring = ring
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def c(self):
        return self._get("c", lambda: covariance_field(self.img, self.window))

    @property
    def cp(self):
        return self._get("cp", lambda: cp_field(self.c, self.guard, self.ring))

    @property
    def powers(self):
        return self._get("p", lambda: yamaguchi4_field(self.c))

    @property
    def powers_cp(self):
        return self._get("pcp", lambda: yamaguchi4_field(self.cp))

    @property
    def delta_s(self):
        def run():
            ds, n_bad = delta_s_field(self.c)
            self._cache["n_degenerate"] = n_bad
            return ds
        return self._get("ds", run)

    def detector(self, name):
        if name not in DETECTORS:
            raise InvalidArgumentError(f"unknown detector {name!r}; choose from {DETECTORS}")
        fn = {"joint-sa": self._joint_sa, "dbsp": self._dbsp, "rsdvh": self._rsdvh,
              "delta-s": lambda: self.delta_s, "span": lambda: span_image(self.img)}[name]
        return DetectorMap(np.clip(fn(), 0.0, None), name, self.window)

    def _joint_sa(self):
        p = self.powers
        return (p[..., 1] + p[..., 2]) * p[..., 3] * self.delta_s

    def _dbsp(self):
        p = self.powers_cp
        return (p[..., 1] + p[..., 2]) * p[..., 3]

    def _rsdvh(self):
        p, q = self.powers, self.powers_cp
        rs = np.maximum(surface_similarity_field(self.c.data),
                        surface_similarity_field(self.cp.data))
        dv = np.maximum(p[..., 1], q[..., 1]) + np.maximum(p[..., 2], q[..., 2])
        return rs * dv * np.maximum(p[..., 3], q[..., 3])


def detector_map(img, name, window=DEFAULT_WINDOW, guard=None, ring=None):
    return Features(img, window, guard, ring).detector(name)


def joint_sa_map(img, window=DEFAULT_WINDOW):
    return detector_map(img, "joint-sa", window)


def dbsp_map(img, window=DEFAULT_WINDOW, guard=None, ring=None):
    return detector_map(img, "dbsp", window, guard, ring)


def rsdvh_map(img, window=DEFAULT_WINDOW, guard=None, ring=None):
    return detector_map(img, "rsdvh", window, guard, ring)


def delta_s_map(img, window=DEFAULT_WINDOW):
    return detector_map(img, "delta-s", window)


def span_map(img):
    return DetectorMap(span_image(img), "span", 1)


def region_mean(dmap, box):
    box.check(dmap.height, dmap.width)
    return float(dmap.values[box.slices()].mean())


def scr(dmap, target, clutter):
    """``20 log10(mean(target) / mean(clutter))`` in dB."""
    t = region_mean(dmap, target)
    c = region_mean(dmap, clutter)
    if not c > 0:
        raise UndefinedSCRError("clutter region mean is zero")
    if t == 0:
        return -math.inf
    return 20.0 * math.log10(t / c)
