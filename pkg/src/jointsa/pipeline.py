"""End-to-end detection: image -> detector map -> GGD fit -> CFAR mask -> score.

Artifacts are produced in memory as bytes and only written once every
stage has succeeded.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import io
from .cfar import DEFAULT_GUARD_PFA, DEFAULT_PFA, cfar_detect, fit_sample, score
from .detectors import DEFAULT_WINDOW, DETECTORS, DetectorMap, Features, RegionBox, scr
from .errors import InvalidArgumentError
from .ggd import kl_symmetric, make_histogram, model_masses
from .polarimetry import check_window

HIST_BINS = 200


@dataclass
class PipelineConfig:
    detector: str = "joint-sa"
    window: int = DEFAULT_WINDOW
    pfa: float = DEFAULT_PFA
    guard_pfa: float = DEFAULT_GUARD_PFA
    guard_pct: float = None
    bins: int = HIST_BINS

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise InvalidArgumentError(
                f"unknown detector {self.detector!r}; choose from {', '.join(DETECTORS)}")
        check_window(self.window)
        if not 0.0 < self.pfa < 1.0:
            raise InvalidArgumentError("pfa must lie in (0, 1)")
        if self.bins < 1:
            raise InvalidArgumentError("bins must be >= 1")


def as_stored(values):
    """Values as they read back from a float32 raster."""
    return np.asarray(values, dtype="<f4").astype(np.float64)


def fit_summary(values, guard_pfa=DEFAULT_GUARD_PFA, guard_pct=None, bins=HIST_BINS,
                border=0):
    """Fit a GGD to a mean-normalized map; returns ``(summary, histogram_rows)``."""
    v = np.asarray(values, dtype=np.float64)
    if border:
        v = v[border:v.shape[0] - border, border:v.shape[1] - border]
    v = v[v > 0]
    if v.size == 0:
        raise InvalidArgumentError("map has no positive values to fit")
    scale = float(v.mean())
    x = v / scale
    params, n = fit_sample(x, guard_pfa, guard_pct)
    hist = make_histogram(x, bins)
    kl = kl_symmetric(hist, params)
    model = model_masses(hist, params)
    rows = [(f"{hist.edges[i]:.9g}", f"{hist.edges[i + 1]:.9g}", f"{hist.masses[i]:.9g}",
             f"{model[i]:.9g}") for i in range(bins)]
    summary = {"nu": params.nu, "kappa": params.kappa, "sigma": params.sigma, "kl": kl,
               "n": int(n), "bins": int(bins), "scale": scale}
    return summary, rows


HIST_HEADER = ("bin_left", "bin_right", "empirical_mass", "model_mass")


def run_pipeline(img, cfg, truth=None):
    """Run the full chain on a PolImage.

    Returns ``(report, artifacts)`` where ``artifacts`` maps a role
    (``map``, ``map_sidecar``, ``mask``, ``report``, ``histogram``) to bytes.
    """
    if truth is not None and np.shape(truth) != img.shape:
        raise InvalidArgumentError("truth mask and image differ in size")
    check_window(cfg.window, img.height, img.width)
    feats = Features(img, cfg.window)
    dmap = feats.detector(cfg.detector)
    stored = as_stored(dmap.values)
    border = cfg.window // 2
    det = cfar_detect(stored, cfg.pfa, cfg.guard_pfa, cfg.guard_pct, border=border)
    if det.params is None:
        raise InvalidArgumentError("detector map is zero everywhere")
    fit, hist_rows = fit_summary(stored, cfg.guard_pfa, cfg.guard_pct, cfg.bins, border)
    report = {"detector": cfg.detector, "window": cfg.window, "pfa": cfg.pfa,
              "guard_pfa": cfg.guard_pfa, "guard_pct": cfg.guard_pct,
              "width": img.width, "height": img.height,
              "threshold": det.threshold, "fit": fit, "n_flagged": int(det.mask.sum()),
              "n_degenerate": int(feats._cache.get("n_degenerate", 0))}
    if truth is not None:
        report["score"] = score(det, truth).to_dict()
    payload, side = io.encode_raster({cfg.detector: stored},
                                     {"detector": cfg.detector, "window": cfg.window})
    artifacts = {"map": payload, "map_sidecar": side.encode("utf-8"),
                 "mask": io.encode_pnm(io.mask_to_pixels(det.mask)),
                 "report": io.encode_json(report),
                 "histogram": io.encode_csv(HIST_HEADER, hist_rows)}
    return report, artifacts


def format_db(v):
    return "-inf" if v == -math.inf else f"{v:.2f}"


def scr_table(maps, regions):
    """Per-target SCR rows for several maps.

    ``maps`` is an ordered name -> (H, W) array dict, ``regions`` a list of
    ``(name, target_box, clutter_box)``.  Returns ``(header, rows)``.
    """
    dmaps = {n: DetectorMap(np.clip(v, 0.0, None), n, 1) for n, v in maps.items()}
    header = ["target"] + list(dmaps)
    rows = []
    for name, t, c in regions:
        tb, cb = RegionBox(*t), RegionBox(*c)
        rows.append([name] + [format_db(scr(m, tb, cb)) for m in dmaps.values()])
    return header, rows
