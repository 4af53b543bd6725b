"""Quad-pol SAR ship detection.

The joint-SA detector multiplies the double-bounce plus volume power and the
helix power of a four-component decomposition by the wave-polarization
anisotropy; a generalized Gamma CFAR turns the map into a detection mask.
"""
from .cfar import DetectionMask, DetectionReport, cfar_detect, score
from .decomposition import FourComponentPowers, helix_power, surface_roughness_beta1, yamaguchi4
from .detectors import DETECTORS, DetectorMap, RegionBox, detector_map, scr
from .errors import (DegeneratePixelError, DegenerateSampleError, FitError,
                     InvalidArgumentError, JointSAError, UndefinedRoughnessError,
                     UndefinedSCRError)
from .ggd import GGammaParams, cfar_threshold, fit_molc, ggd_pdf, ggd_sample, ggd_tail
from .polarimetry import HermitianField, PolImage, ScatteringMatrix, covariance_field
from .simulator import SceneSpec, SeaModel, ShipSpec, reference_scene, simulate_scene

__version__ = "0.1.0"

__all__ = [
    "DETECTORS", "DegeneratePixelError", "DegenerateSampleError", "DetectionMask",
    "DetectionReport", "DetectorMap", "FitError", "FourComponentPowers", "GGammaParams",
    "HermitianField", "InvalidArgumentError", "JointSAError", "PolImage", "RegionBox",
    "ScatteringMatrix", "SceneSpec", "SeaModel", "ShipSpec", "UndefinedRoughnessError",
    "UndefinedSCRError", "cfar_detect", "cfar_threshold", "covariance_field",
    "detector_map", "fit_molc", "ggd_pdf", "ggd_sample", "ggd_tail", "helix_power",
    "reference_scene", "score", "scr", "simulate_scene", "surface_roughness_beta1",
    "yamaguchi4",
]
