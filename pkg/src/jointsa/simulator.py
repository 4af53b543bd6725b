"""Synthetic quad-pol scenes: Gaussian sea clutter plus additive ship targets.

Clutter lexicographic vectors are ``k = L z`` with ``L`` the Hermitian square
root of the sea covariance and ``z`` a unit circular complex Gaussian
triple.  Ships add a mixture of canonical mechanisms, each scaled by
``sqrt(multiplier * weight * clutter_power)``.

Random numbers come from counter-keyed Philox streams, one per
``(seed, stream, row)``, so any row partition reproduces the same scene.
"""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .polarimetry import PolImage

SQRT2 = math.sqrt(2.0)
MECHANISMS = ("surface", "dihedral", "volume", "helix")

SURFACE_K = np.array([1.0, 0.0, 1.0], dtype=np.complex128) / SQRT2
DIHEDRAL_K = np.array([1.0, 0.0, -1.0], dtype=np.complex128) / SQRT2
HELIX_K = np.array([1.0, -1j * SQRT2, -1.0], dtype=np.complex128) / 2.0

_CLUTTER, _PHASE, _ORIENT, _SHIP = 0, 1, 2, 3


@dataclass(frozen=True)
class SeaModel:
    """Reflection-symmetric sea clutter.

    ``copol_power`` is ``C11 + C33``, ``copol_ratio_db`` is
    ``10 log10(C33 / C11)``, ``rho`` the complex HH-VV correlation and
    ``crosspol_fraction`` the share ``C22 / trace(C)``.
    """

    copol_power: float = 1.0
    copol_ratio_db: float = 0.0
    rho: complex = 0.0
    crosspol_fraction: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "rho", complex(self.rho))
        if not self.copol_power > 0:
            raise InvalidArgumentError("copol_power must be positive")
        if not abs(self.rho) < 1:
            raise InvalidArgumentError("|rho| must be < 1")
        if not 0 <= self.crosspol_fraction < 1:
            raise InvalidArgumentError("crosspol_fraction must lie in [0, 1)")
        if not math.isfinite(self.copol_ratio_db):
            raise InvalidArgumentError("copol_ratio_db must be finite")

    @property
    def total_power(self):
        return self.copol_power / (1.0 - self.crosspol_fraction)


@dataclass(frozen=True)
class ShipSpec:
    """A rectangular ship centred at ``(cx, cy)`` with extent ``w`` x ``h``."""

    cx: int
    cy: int
    w: int
    h: int
    multiplier: float
    weights: dict
    coherent: bool = False

    def __post_init__(self):
        w = {m: float(self.weights.get(m, 0.0)) for m in MECHANISMS}
        extra = set(self.weights) - set(MECHANISMS)
        if extra:
            raise InvalidArgumentError(f"unknown mechanisms {sorted(extra)}")
        if any(v < 0 for v in w.values()) or abs(sum(w.values()) - 1.0) > 1e-9:
            raise InvalidArgumentError("mixture weights must be >= 0 and sum to 1")
        if self.w < 1 or self.h < 1 or not self.multiplier >= 0:
            raise InvalidArgumentError("ship extent must be >= 1 and multiplier >= 0")
        object.__setattr__(self, "weights", w)

    @property
    def box(self):
        """``(x0, y0, w, h)`` pixel rectangle."""
        return (self.cx - self.w // 2, self.cy - self.h // 2, self.w, self.h)


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    sea: SeaModel = field(default_factory=SeaModel)
    ships: tuple = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ships", tuple(self.ships))
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError("scene must be at least 1x1")
        for i, s in enumerate(self.ships):
            x0, y0, w, h = s.box
            if x0 < 0 or y0 < 0 or x0 + w > self.width or y0 + h > self.height:
                raise InvalidArgumentError(f"ship {i} lies outside the scene")

    def to_dict(self):
        sea = asdict(self.sea)
        sea["rho"] = [self.sea.rho.real, self.sea.rho.imag]
        return {"width": self.width, "height": self.height, "seed": self.seed,
                "sea": sea, "ships": [asdict(s) for s in self.ships]}

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise InvalidArgumentError("scene spec must be a JSON object")
        try:
            sea = dict(d.get("sea", {}))
            if "rho" in sea:
                r = sea["rho"]
                sea["rho"] = complex(r[0], r[1]) if isinstance(r, (list, tuple)) else complex(r)
            ships = [ShipSpec(**s) for s in d.get("ships", [])]
            return cls(int(d["width"]), int(d["height"]), SeaModel(**sea), ships,
                       int(d.get("seed", 0)))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, InvalidArgumentError):
                raise
            raise InvalidArgumentError(f"malformed scene spec: {e}") from e

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidArgumentError(f"scene spec is not valid JSON: {e}") from e
        return cls.from_dict(d)


def sea_covariance(model):
    r = 10.0 ** (model.copol_ratio_db / 10.0)
    c11 = model.copol_power / (1.0 + r)
    c33 = model.copol_power * r / (1.0 + r)
    c22 = model.crosspol_fraction * model.total_power
    c13 = model.rho * math.sqrt(c11 * c33)
    return np.array([[c11, 0, c13], [0, c22, 0], [np.conj(c13), 0, c33]],
                    dtype=np.complex128)


def hermitian_sqrt(c):
    w, v = np.linalg.eigh(c)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _rng(seed, stream, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, index])))


def _complex_normal(rng, shape):
    g = rng.standard_normal(shape + (2,))
    return (g[..., 0] + 1j * g[..., 1]) / SQRT2


def _ship_phases(spec):
    """Fixed per-mechanism phases of coherent ships, shape (n_ships, 4)."""
    out = np.empty((len(spec.ships), 4))
    for i in range(len(spec.ships)):
        out[i] = _rng(spec.seed, _SHIP, i).uniform(0.0, 2.0 * np.pi, 4)
    return out


def _row(spec, L, p_clutter, ship_phases, y):
    W = spec.width
    z = _complex_normal(_rng(spec.seed, _CLUTTER, y), (W, 3))
    k = z @ L.T
    rows = [i for i, s in enumerate(spec.ships) if s.box[1] <= y < s.box[1] + s.box[3]]
    if not rows:
        return k
    phase = _rng(spec.seed, _PHASE, y).uniform(0.0, 2.0 * np.pi, (W, 4))
    theta = _rng(spec.seed, _ORIENT, y).uniform(0.0, np.pi, W)
    c, s = np.cos(theta), np.sin(theta)
    volume = np.stack([c * c, SQRT2 * s * c, s * s], axis=1).astype(np.complex128)
    for i in rows:
        ship = spec.ships[i]
        x0, _, w, _ = ship.box
        xs = slice(x0, x0 + w)
        ph = np.broadcast_to(ship_phases[i], (w, 4)) if ship.coherent else phase[xs]
        vecs = (SURFACE_K[None, :], DIHEDRAL_K[None, :], volume[xs], HELIX_K[None, :])
        for m, name in enumerate(MECHANISMS):
            wt = ship.weights[name]
            if wt == 0:
                continue
            amp = math.sqrt(ship.multiplier * wt * p_clutter)
            k[xs] += (amp * np.exp(1j * ph[:, m]))[:, None] * vecs[m]
    return k


def truth_mask(spec):
    mask = np.zeros((spec.height, spec.width), dtype=bool)
    for s in spec.ships:
        x0, y0, w, h = s.box
        mask[y0:y0 + h, x0:x0 + w] = True
    return mask


def simulate_scene(spec, workers=1):
    """Render ``spec``; returns ``(PolImage, truth mask)``.

    Output is identical for any ``workers`` count.
    """
    C = sea_covariance(spec.sea)
    L = hermitian_sqrt(C)
    p_clutter = float(np.trace(C).real)
    phases = _ship_phases(spec)
    k = np.empty((spec.height, spec.width, 3), dtype=np.complex128)

    def fill(y):
        k[y] = _row(spec, L, p_clutter, phases, y)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as ex:
            list(ex.map(fill, range(spec.height)))
    else:
        for y in range(spec.height):
            fill(y)
    return PolImage.from_lex(k), truth_mask(spec)


REFERENCE_SEA = SeaModel(copol_power=1.0, copol_ratio_db=1.0, rho=0.6,
                         crosspol_fraction=0.1)

# speckled mixtures so each ship is depolarizing and carries helix power
_REFERENCE_SHIPS = (
    (96, 80, 21, 9, 80.0),
    (300, 96, 17, 7, 48.0),
    (420, 200, 13, 7, 30.0),
    (150, 260, 11, 5, 20.0),
    (340, 330, 9, 5, 13.0),
    (90, 420, 9, 5, 9.0),
    (400, 440, 7, 5, 6.0),
)
REFERENCE_WEIGHTS = {"surface": 0.1, "dihedral": 0.4, "volume": 0.2, "helix": 0.3}


def reference_scene():
    """The canonical 512 x 512 scene with seven ships of decreasing strength."""
    ships = [ShipSpec(cx, cy, w, h, m, REFERENCE_WEIGHTS)
             for cx, cy, w, h, m in _REFERENCE_SHIPS]
    return SceneSpec(512, 512, REFERENCE_SEA, ships, seed=42)


def reference_regions(spec=None, margin=6, clutter_size=48):
    """Target and clutter boxes for SCR on a scene.

    Each target box is its ship box; each clutter box is a square of
    ``clutter_size`` placed beside the ship, ``margin`` pixels away.
    Returns a list of ``(name, target_box, clutter_box)``.
    """
    spec = spec or reference_scene()
    truth = truth_mask(spec)
    out = []
    for i, s in enumerate(spec.ships):
        x0, y0, w, h = s.box
        cy = min(max(y0 + h // 2 - clutter_size // 2, 0), spec.height - clutter_size)
        cand = [x0 + w + margin, x0 - margin - clutter_size]
        box = None
        for cx in cand:
            if 0 <= cx <= spec.width - clutter_size:
                if not truth[cy:cy + clutter_size, cx:cx + clutter_size].any():
                    box = (cx, cy, clutter_size, clutter_size)
                    break
        if box is None:
            raise InvalidArgumentError(f"no ship-free clutter box beside ship {i}")
        out.append((f"ship{i + 1}", s.box, box))
    return out
