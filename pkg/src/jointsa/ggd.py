"""Generalized Gamma distribution: density, tail, CFAR threshold, sampling, MoLC fit.

Three-parameter form with power ``nu`` (nonzero), shape ``kappa`` and scale
``sigma``::

    p(x) = |nu| kappa^kappa / (sigma Gamma(kappa)) (x/sigma)^(kappa nu - 1)
           exp(-kappa (x/sigma)^nu),   x > 0

If ``G ~ Gamma(kappa, 1)`` then ``X = sigma (G / kappa)^(1/nu)``.  Special
cases: ``nu = 1`` Gamma, ``nu = 2, kappa = 1`` Rayleigh, ``kappa = 1``
Weibull.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import special
from .errors import DegenerateSampleError, FitError, InvalidArgumentError

KAPPA_BRACKET = (1e-3, 1e4)
SAMPLE_BLOCK = 1 << 16
KL_EPS = 1e-12


@dataclass(frozen=True)
class GGammaParams:
    nu: float
    kappa: float
    sigma: float

    def __post_init__(self):
        for name in ("nu", "kappa", "sigma"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidArgumentError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.nu == 0:
            raise InvalidArgumentError("nu must be nonzero")
        if self.kappa <= 0 or self.sigma <= 0:
            raise InvalidArgumentError("kappa and sigma must be positive")

    def to_dict(self):
        return asdict(self)

    def scaled(self, c):
        """Parameters of ``c * X``."""
        return GGammaParams(self.nu, self.kappa, self.sigma * c)


@dataclass(frozen=True)
class LogCumulants:
    c1: float
    c2: float
    c3: float


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    total: float

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.edges.ndim != 1 or self.edges.size != self.counts.size + 1:
            raise InvalidArgumentError("need len(edges) == len(counts) + 1")
        if np.any(np.diff(self.edges) <= 0):
            raise InvalidArgumentError("bin edges must be strictly increasing")

    @property
    def masses(self):
        return self.counts / self.total


def _x(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise InvalidArgumentError("GGD support is x > 0")
    return x


def _out(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def ggd_logpdf(x, p):
    x = _x(x)
    z = x / p.sigma
    lz = np.log(z)
    return _out(math.log(abs(p.nu)) + p.kappa * math.log(p.kappa) - math.log(p.sigma)
                - special.lngamma(p.kappa) + (p.kappa * p.nu - 1.0) * lz
                - p.kappa * np.exp(p.nu * lz))


def ggd_pdf(x, p):
    return _out(np.exp(ggd_logpdf(x, p)))


def _gamma_arg(x, p):
    return p.kappa * np.exp(p.nu * np.log(x / p.sigma))


def ggd_cdf(x, p):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidArgumentError("GGD support is x > 0")
    with np.errstate(divide="ignore", over="ignore"):
        u = _gamma_arg(np.where(x > 0, x, 1.0), p)
    if p.nu > 0:
        v = np.where(x > 0, special.gammainc_lower(p.kappa, u), 0.0)
    else:
        v = np.where(x > 0, special.gammainc_upper(p.kappa, u), 0.0)
    return _out(v)


def ggd_tail(x, p):
    """Exceedance probability P(X > x)."""
    x = _x(x)
    with np.errstate(over="ignore"):
        u = _gamma_arg(x, p)
    if p.nu > 0:
        return _out(special.gammainc_upper(p.kappa, u))
    return _out(special.gammainc_lower(p.kappa, u))


def cfar_threshold(p, pfa):
    """Threshold ``m`` with ``P(X > m) = pfa``."""
    if not 0.0 < pfa < 1.0:
        raise InvalidArgumentError("pfa must lie in (0, 1)")
    if p.nu > 0:
        # Q^-1(kappa, pfa) == P^-1(kappa, 1 - pfa), without the cancellation
        g = special.gammainc_upper_inv(p.kappa, pfa)
    else:
        g = special.gammainc_lower_inv(p.kappa, pfa)
    return float(p.sigma * (g / p.kappa) ** (1.0 / p.nu))


def ggd_sample(p, n, seed=0):
    """``n`` draws; block ``b`` uses its own Philox stream keyed by (seed, b)."""
    n = int(n)
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    out = np.empty(n)
    for b, lo in enumerate(range(0, n, SAMPLE_BLOCK)):
        hi = min(n, lo + SAMPLE_BLOCK)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), b])))
        g = rng.standard_gamma(p.kappa, hi - lo)
        out[lo:hi] = p.sigma * (g / p.kappa) ** (1.0 / p.nu)
    return out


def log_cumulants(samples):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 3:
        raise InvalidArgumentError("need at least 3 samples")
    if np.any(~(x > 0)):
        raise InvalidArgumentError("log-cumulants need strictly positive samples")
    lx = np.log(x)
    c1 = lx.mean()
    d = lx - c1
    d2 = d * d
    return LogCumulants(float(c1), float(d2.mean()), float((d2 * d).mean()))


def _shape_ratio(kappa):
    return special.tetragamma(kappa) ** 2 / special.trigamma(kappa) ** 3


def fit_molc_cumulants(lc):
    """Solve the log-cumulant equations for (nu, kappa, sigma)."""
    c1, c2, c3 = lc.c1, lc.c2, lc.c3
    if not c2 > 0:
        raise DegenerateSampleError("zero log-variance: sample is constant")
    target = c3 * c3 / (c2 ** 3)
    lo, hi = math.log(KAPPA_BRACKET[0]), math.log(KAPPA_BRACKET[1])
    r_lo, r_hi = _shape_ratio(KAPPA_BRACKET[0]), _shape_ratio(KAPPA_BRACKET[1])
    diag = {"c1": c1, "c2": c2, "c3": c3, "target_ratio": target,
            "ratio_at_bracket": (r_lo, r_hi), "kappa_bracket": KAPPA_BRACKET}
    if c3 == 0 or not (r_hi <= target <= r_lo):
        raise FitError("log-cumulant shape equation has no root in the kappa bracket", diag)
    # the ratio decreases in kappa
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _shape_ratio(math.exp(mid)) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    kappa = math.exp(0.5 * (lo + hi))
    nu = math.copysign(math.sqrt(special.trigamma(kappa) / c2), -c3)
    sigma = math.exp(c1 - (special.digamma(kappa) - math.log(kappa)) / nu)
    return GGammaParams(nu, kappa, sigma)


def fit_molc(samples):
    return fit_molc_cumulants(log_cumulants(samples))


def model_log_cumulants(p):
    k = p.kappa
    return LogCumulants(math.log(p.sigma) + (special.digamma(k) - math.log(k)) / p.nu,
                        special.trigamma(k) / p.nu ** 2,
                        special.tetragamma(k) / p.nu ** 3)


def make_histogram(samples, bins=200, upper_pct=99.95):
    """Equal-width bins from 0 to the ``upper_pct`` percentile of the sample."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise InvalidArgumentError("empty sample")
    top = float(np.percentile(x, upper_pct))
    if not top > 0:
        raise InvalidArgumentError("sample percentile is not positive")
    edges = np.linspace(0.0, top, bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    return Histogram(edges, counts, float(counts.sum()))


def model_masses(h, p):
    """Model probability of each bin, conditioned on the histogram range."""
    F = ggd_cdf(h.edges, p)
    span = F[-1] - F[0]
    if not span > 0:
        raise InvalidArgumentError("model puts no mass on the histogram range")
    return np.diff(F) / span


def kl_symmetric(h, p):
    """Symmetric Kullback-Leibler distance between histogram and model bin masses."""
    if not h.total > 0:
        raise InvalidArgumentError("empty histogram")
    emp = h.masses
    mod = model_masses(h, p)
    keep = (emp >= KL_EPS) & (mod >= KL_EPS)
    e = emp[keep]
    m = mod[keep]
    return float(np.sum((e - m) * np.log(e / m)))
