"""Goodness of fit against a fully specified normal N(0, var)."""

import math
from typing import Optional

import numpy as np
from scipy.stats import kstest, norm


def anderson_darling_statistic(x: np.ndarray, var: float, mean: float = 0.0) -> float:
    """A^2 = -m - (1/m) sum_i (2i - 1) [log F(y_i) + log(1 - F(y_{m+1-i}))], y sorted."""
    y = np.sort((np.asarray(x, dtype=float) - mean) / math.sqrt(var))
    m = y.size
    i = np.arange(1, m + 1)
    s = np.sum((2 * i - 1) * (norm.logcdf(y) + norm.logsf(y[::-1])))
    return float(-m - s / m)


def _adinf(z: float) -> float:
    """Limiting distribution function of A^2 (Marsaglia series)."""
    if z <= 0.0:
        return 0.0
    if z < 2.0:
        return (
            math.exp(-1.2337141 / z)
            / math.sqrt(z)
            * (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.0116720 - 0.00168691 * z) * z) * z) * z) * z)
        )
    return math.exp(-math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z))


def anderson_darling_pvalue(a2: float) -> float:
    return float(min(max(1.0 - _adinf(a2), 0.0), 1.0))


def anderson_darling_test(x: np.ndarray, var: float, mean: float = 0.0) -> Optional[float]:
    """p-value of the A^2 test; None when var is not positive (nothing to test)."""
    if not var > 0.0:
        return None
    return anderson_darling_pvalue(anderson_darling_statistic(x, var, mean))


def ks_test(x: np.ndarray, var: float, mean: float = 0.0) -> Optional[float]:
    if not var > 0.0:
        return None
    return float(kstest(np.asarray(x, dtype=float), norm(loc=mean, scale=math.sqrt(var)).cdf).pvalue)
