"""Global CFAR thresholding of detector maps and target-level scoring.

The map is normalized by its mean, a GGD is fitted by log-cumulants over the
positive interior pixels and the threshold for the requested false-alarm
probability is applied to the whole map.

Bright targets would inflate the fit, so the fit sample is guarded: pixels
above the GGD threshold at ``guard_pfa`` (far beyond the detection
threshold) are dropped and the fit repeated until the sample stops
changing.  A fixed percentile cut (``guard_pct``) is also available; note
that it truncates pure clutter and biases the fitted tail.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import FitError, InvalidArgumentError
from .ggd import GGammaParams, cfar_threshold, fit_molc

log = logging.getLogger(__name__)

DEFAULT_PFA = 1e-5
DEFAULT_GUARD_PFA = 1e-7
MAX_GUARD_ROUNDS = 20
START_TRIM_PCT = 90.0
EIGHT = np.ones((3, 3), dtype=bool)


@dataclass
class DetectionMask:
    mask: np.ndarray
    threshold: float
    params: GGammaParams = None
    pfa: float = DEFAULT_PFA
    scale: float = 1.0
    n_fit: int = 0
    border: int = 0

    @property
    def height(self):
        return self.mask.shape[0]

    @property
    def width(self):
        return self.mask.shape[1]

    def to_dict(self):
        return {"threshold": self.threshold, "pfa": self.pfa, "scale": self.scale,
                "params": None if self.params is None else self.params.to_dict(),
                "n_fit": self.n_fit, "border": self.border,
                "n_flagged": int(self.mask.sum())}


@dataclass
class DetectionReport:
    detected: int
    missed: int
    false_alarms: int
    hits: list = field(default_factory=list)
    n_components: int = 0

    def to_dict(self):
        return {"detected": self.detected, "missed": self.missed,
                "false_alarms": self.false_alarms, "hits": list(self.hits),
                "n_components": self.n_components}


def _interior(shape, border):
    inner = np.zeros(shape, dtype=bool)
    H, W = shape
    if 2 * border < H and 2 * border < W:
        inner[border:H - border, border:W - border] = True
    return inner


def fit_sample(x, pfa_guard=DEFAULT_GUARD_PFA, guard_pct=None):
    """Fit a GGD to positive ``x`` with the outlier guard; returns ``(params, n_used)``."""
    x = np.asarray(x, dtype=float).ravel()
    x = x[x > 0]
    if guard_pct is not None:
        if not 0 < guard_pct <= 100:
            raise InvalidArgumentError("guard percentile must lie in (0, 100]")
        x = x[x <= np.percentile(x, guard_pct)]
    if pfa_guard is None:
        return fit_molc(x), x.size
    # start from a trimmed sample so extreme targets cannot push the
    # log-cumulants out of the solvable range, then iterate on the full one
    start = x[x <= np.percentile(x, START_TRIM_PCT)]
    p, n = fit_molc(start), start.size
    last = -1
    for _ in range(MAX_GUARD_ROUNDS):
        keep = x[x <= cfar_threshold(p, pfa_guard)]
        if keep.size == last:
            break
        last = keep.size
        try:
            p, n = fit_molc(keep), keep.size
        except FitError as e:
            log.info("guarded refit failed (%s); keeping the previous fit", e)
            break
    return p, n


def cfar_detect(dmap, pfa=DEFAULT_PFA, guard_pfa=DEFAULT_GUARD_PFA, guard_pct=None,
                border=None):
    """Threshold a detector map at false-alarm probability ``pfa``.

    Parameters
    ----------
    dmap : DetectorMap or ndarray
    pfa : float
        Per-pixel false-alarm probability in (0, 1).
    guard_pfa : float or None
        Outlier guard level for the fit; ``None`` fits on all pixels.
    guard_pct : float or None
        Optional percentile cut applied before fitting.
    border : int, optional
        Pixels within this distance of the edge are neither fitted nor
        flagged.  Defaults to half the map's window.

    Returns
    -------
    DetectionMask
        ``mask`` is ``values > threshold`` with ``threshold`` in map units.
    """
    if not 0.0 < pfa < 1.0:
        raise InvalidArgumentError("pfa must lie in (0, 1)")
    if guard_pfa is not None and not 0.0 < guard_pfa < 1.0:
        raise InvalidArgumentError("guard pfa must lie in (0, 1)")
    values = getattr(dmap, "values", dmap)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.size == 0:
        raise InvalidArgumentError("detector map must be a nonempty 2-D array")
    if border is None:
        border = getattr(dmap, "window", 1) // 2
    inner = _interior(values.shape, int(border))
    sample = values[inner]
    scale = float(sample.mean()) if sample.size else 0.0
    if not scale > 0:
        log.warning("detector map is zero everywhere; returning an empty mask")
        return DetectionMask(np.zeros(values.shape, dtype=bool), float("inf"), None, pfa,
                             0.0, 0, int(border))
    params, n = fit_sample(sample / scale, guard_pfa, guard_pct)
    m = cfar_threshold(params, pfa) * scale
    mask = (values > m) & inner
    return DetectionMask(mask, m, params, pfa, scale, n, int(border))


def truth_boxes(truth):
    """Bounding boxes ``(x, y, w, h)`` of the 8-connected truth components."""
    lab, n = ndimage.label(np.asarray(truth, dtype=bool), structure=EIGHT)
    boxes = []
    for sl in ndimage.find_objects(lab):
        boxes.append((sl[1].start, sl[0].start, sl[1].stop - sl[1].start,
                      sl[0].stop - sl[0].start))
    return boxes


def score(mask, truth, min_overlap=1):
    """Target-level accounting of a detection mask against a truth mask.

    A target is detected when some mask component overlaps its bounding box
    in at least ``min_overlap`` pixels; components overlapping no target box
    are false alarms.
    """
    m = np.asarray(getattr(mask, "mask", mask), dtype=bool)
    t = np.asarray(truth, dtype=bool)
    if m.shape != t.shape:
        raise InvalidArgumentError(f"mask {m.shape} and truth {t.shape} differ in size")
    if min_overlap < 1:
        raise InvalidArgumentError("min_overlap must be >= 1")
    lab, n = ndimage.label(m, structure=EIGHT)
    boxes = truth_boxes(t)
    touched = np.zeros(n + 1, dtype=bool)
    hits = []
    for x, y, w, h in boxes:
        ids, counts = np.unique(lab[y:y + h, x:x + w], return_counts=True)
        good = (ids > 0) & (counts >= min_overlap)
        hits.append(bool(good.any()))
        touched[ids[ids > 0]] = True
    fa = int(n - touched[1:].sum())
    det = int(sum(hits))
    return DetectionReport(det, len(boxes) - det, fa, hits, int(n))
