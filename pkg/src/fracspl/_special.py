"""Gamma-function helpers shared by the kernel and Mittag-Leffler code."""

import math

import numpy as np
from scipy import special

__all__ = ["rgamma", "log_abs_gamma", "gamma_sign"]


def rgamma(x):
    """Reciprocal gamma function, equal to zero at the poles of :math:`\\Gamma`."""
    if np.ndim(x) == 0:
        x = float(x)
        if x <= 0.0 and x == math.floor(x):
            return 0.0
        if x < 171.0:
            return 1.0 / math.gamma(x)
        return math.exp(-math.lgamma(x))
    return special.rgamma(np.asarray(x, dtype=float))


def log_abs_gamma(x):
    """``log|Gamma(x)|``; ``+inf`` at the poles."""
    if np.ndim(x) == 0:
        x = float(x)
        if x <= 0.0 and x == math.floor(x):
            return math.inf
        return math.lgamma(x)
    return special.gammaln(np.asarray(x, dtype=float))


def gamma_sign(x):
    """Sign of ``Gamma(x)``, zero at the poles."""
    x = np.asarray(x, dtype=float)
    pole = (x <= 0) & (x == np.floor(x))
    sign = np.where(pole, 0.0, special.gammasgn(x))
    return float(sign) if sign.ndim == 0 else sign
