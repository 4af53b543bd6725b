"""Gamma-family special functions used by the GGD model and the MoLC fit.

Thin domain-checked wrappers over :mod:`scipy.special`; the incomplete-gamma
inverses get one Newton polish step against the forward function.
"""
import numpy as np
from scipy import special as sp

from .errors import InvalidArgumentError


def _positive(a, name="a"):
    a = np.asarray(a, dtype=float)
    if np.any(~(a > 0)):
        raise InvalidArgumentError(f"{name} must be positive")
    return a


def _nonneg(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise InvalidArgumentError("x must be non-negative")
    return x


def _unit_open(y):
    y = np.asarray(y, dtype=float)
    if np.any(~((y > 0) & (y < 1))):
        raise InvalidArgumentError("probability must lie in (0, 1)")
    return y


def _out(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def lngamma(a):
    return _out(sp.gammaln(_positive(a)))


def digamma(a):
    return _out(sp.digamma(_positive(a)))


def trigamma(a):
    return _out(sp.polygamma(1, _positive(a)))


def tetragamma(a):
    return _out(sp.polygamma(2, _positive(a)))


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    return _out(sp.gammainc(_positive(a), _nonneg(x)))


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    return _out(sp.gammaincc(_positive(a), _nonneg(x)))


def _newton_polish(a, x, target, upper):
    # d/dx P(a, x) = x^(a-1) e^-x / Gamma(a)
    with np.errstate(all="ignore"):
        logpdf = (a - 1.0) * np.log(x) - x - sp.gammaln(a)
        pdf = np.exp(logpdf)
        f = (sp.gammaincc(a, x) - target) if upper else (sp.gammainc(a, x) - target)
        step = f / pdf * (-1.0 if upper else 1.0)
        x_new = x - step
    ok = np.isfinite(x_new) & (x_new > 0) & (pdf > 0)
    return np.where(ok, x_new, x)


def gammainc_lower_inv(a, y):
    """Inverse of P(a, .) : returns x with P(a, x) = y."""
    a = _positive(a)
    y = _unit_open(y)
    x = sp.gammaincinv(a, y)
    return _out(_newton_polish(a, x, y, upper=False))


def gammainc_upper_inv(a, y):
    """Inverse of Q(a, .) : returns x with Q(a, x) = y."""
    a = _positive(a)
    y = _unit_open(y)
    x = sp.gammainccinv(a, y)
    return _out(_newton_polish(a, x, y, upper=True))
