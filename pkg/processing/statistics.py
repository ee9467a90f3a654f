"""
Statistical helpers shared by the numerics and the experiments

Inverse normal CDF, midpoint plotting positions, percentile bootstrap and
log-log rate fitting.
"""
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from loguru import logger
from scipy import stats

from core.exceptions import InsufficientGridPoints, ValidationError

# Phi^-1 is evaluated on [U_MIN, 1 - U_MIN] and clamped outside
U_MIN = 1e-15
DEFAULT_BOOTSTRAP = 200


def inverse_normal_cdf(u) -> np.ndarray:
    """Phi^-1(u), clamped to (1e-15, 1 - 1e-15)"""
    return stats.norm.ppf(np.clip(u, U_MIN, 1.0 - U_MIN))


def midpoint_positions(m: int) -> np.ndarray:
    """(i - 0.5) / M for i = 1..M"""
    return (np.arange(1, m + 1) - 0.5) / m


def bootstrap_half_width(statistic: Callable[[np.ndarray], float], sample: np.ndarray,
                         rng: np.random.Generator,
                         n_boot: int = DEFAULT_BOOTSTRAP, level: float = 0.95) -> float:
    """Half-width of the percentile bootstrap interval of ``statistic(sample)``"""
    if n_boot <= 0:
        return 0.0
    sample = np.asarray(sample)
    m = sample.shape[0]
    replicates = np.empty(n_boot)
    for r in range(n_boot):
        replicates[r] = statistic(sample[rng.integers(0, m, size=m)])
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(replicates, [tail, 1.0 - tail])
    return float(hi - lo) / 2.0


def mean_with_ci(values: np.ndarray, rng: np.random.Generator,
                 n_boot: int = DEFAULT_BOOTSTRAP):
    """Sample mean and its bootstrap CI half-width"""
    values = np.asarray(values, dtype=float)
    return float(values.mean()), bootstrap_half_width(np.mean, values, rng, n_boot)


def normal_half_width(values: np.ndarray, level: float = 0.95) -> float:
    """Half-width of the normal-approximation interval of the sample mean"""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(stats.norm.ppf(0.5 + level / 2.0) * stats.sem(values))


@dataclass(frozen=True)
class RateFit:
    """OLS fit of log(error) = intercept + slope * log(parameter)"""

    slope: float
    intercept: float
    slope_stderr: float
    slope_ci: float
    points: int

    @property
    def is_degenerate(self) -> bool:
        return math.isnan(self.slope)


def fit_log_slope(parameters: Sequence[float], errors: Sequence[float], min_points: int = 5,
                  level: float = 0.95) -> RateFit:
    """Fit the log-log slope; nonpositive errors make the fit degenerate (nan)"""
    x = np.asarray(parameters, dtype=float)
    y = np.asarray(errors, dtype=float)
    if x.shape != y.shape:
        raise ValidationError("parameters and errors must have equal length")
    if x.size < min_points:
        raise InsufficientGridPoints(f"slope fit needs >= {min_points} grid points, got {x.size}")
    if np.any(x <= 0):
        raise ValidationError("parameters must be positive for a log-log fit")
    if np.any(y <= 0):
        logger.warning(f"{int(np.sum(y <= 0))} nonpositive errors; the slope fit is degenerate")
        return RateFit(math.nan, math.nan, math.nan, math.nan, int(x.size))
    fit = stats.linregress(np.log(x), np.log(y))
    quantile = stats.t.ppf(0.5 + level / 2.0, x.size - 2)
    return RateFit(float(fit.slope), float(fit.intercept), float(fit.stderr),
                   float(quantile * fit.stderr), int(x.size))
