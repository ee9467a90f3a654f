"""
Empirical quadratic Wasserstein distance in one dimension

In 1-D the optimal coupling is the quantile (comonotone) one, so W2^2 between
two empirical laws of equal size is the mean squared gap of the sorted
samples, and W2^2 to a Gaussian is estimated against Gaussian quantiles at the
midpoint plotting positions.
"""
from dataclasses import dataclass

import numpy as np
from scipy import stats

from core.exceptions import EmptyInput, ValidationError
from processing.statistics import (
    DEFAULT_BOOTSTRAP,
    bootstrap_half_width,
    inverse_normal_cdf,
    midpoint_positions,
)


@dataclass(frozen=True)
class W2Estimate:
    value_squared: float
    sample_count: int
    bootstrap_ci_half_width: float = 0.0

    @property
    def value(self) -> float:
        return self.value_squared ** 0.5


def _as_sample(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise EmptyInput("empty sample")
    return x


def _matched_quantiles(sorted_x: np.ndarray, m: int) -> np.ndarray:
    """Empirical quantiles of sorted_x at the M midpoint positions; identity when sizes agree"""
    if sorted_x.size == m:
        return sorted_x
    return np.quantile(sorted_x, midpoint_positions(m), method='inverted_cdf')


def _sorted_w2(a: np.ndarray, b: np.ndarray) -> float:
    m = min(a.size, b.size)
    qa = _matched_quantiles(np.sort(a), m)
    qb = _matched_quantiles(np.sort(b), m)
    return float(np.mean((qa - qb) ** 2))


def w2_empirical(a, b, rng: np.random.Generator,
                 n_boot: int = DEFAULT_BOOTSTRAP) -> W2Estimate:
    """W2^2 between two empirical laws by sorted matching"""
    a, b = _as_sample(a), _as_sample(b)
    value = _sorted_w2(a, b)
    if n_boot > 0:
        paired_b = b

        def statistic(resampled_a):
            return _sorted_w2(resampled_a, paired_b[rng.integers(0, paired_b.size, paired_b.size)])

        ci = bootstrap_half_width(statistic, a, rng, n_boot)
    else:
        ci = 0.0
    return W2Estimate(value, min(a.size, b.size), ci)


def gaussian_gap_squared(sorted_samples: np.ndarray, mean: float, var: float) -> np.ndarray:
    """(s_(i) - mean - sqrt(var) Phi^-1((i - 0.5) / M))^2 elementwise"""
    q = inverse_normal_cdf(midpoint_positions(sorted_samples.size))
    return (sorted_samples - mean - np.sqrt(var) * q) ** 2


def w2_to_gaussian(samples, mean: float, var: float, rng: np.random.Generator,
                   n_boot: int = DEFAULT_BOOTSTRAP) -> W2Estimate:
    """W2^2 between an empirical law and N(mean, var)"""
    if var < 0:
        raise ValidationError(f"variance must be nonnegative, got {var}")
    samples = _as_sample(samples)
    value = float(np.mean(gaussian_gap_squared(np.sort(samples), mean, var)))
    ci = bootstrap_half_width(lambda s: float(np.mean(gaussian_gap_squared(np.sort(s), mean, var))),
                              samples, rng, n_boot)
    return W2Estimate(value, int(samples.size), ci)


def discrete_w2_to_gaussian(support, probabilities, mean: float, var: float) -> float:
    """
    Exact W2^2 between a discrete law and N(mean, var) by quantile integration

    Each atom x_k owns the Gaussian quantile slab (Phi^-1(F_{k-1}), Phi^-1(F_k)];
    the integral of (x_k - mean - s z)^2 phi(z) over a slab has a closed form
    in the Gaussian partial moments.
    """
    x = np.asarray(support, dtype=float)
    p = np.asarray(probabilities, dtype=float)
    if x.size == 0:
        raise EmptyInput("empty support")
    order = np.argsort(x)
    x, p = x[order], p[order]
    p = p / p.sum()
    upper = np.clip(np.cumsum(p), 0.0, 1.0)
    lower = np.concatenate([[0.0], upper[:-1]])
    a, b = stats.norm.ppf(lower), stats.norm.ppf(upper)
    phi_a, phi_b = stats.norm.pdf(a), stats.norm.pdf(b)
    # z * phi(z) vanishes at +-inf
    a_phi_a = np.where(np.isfinite(a), a * phi_a, 0.0)
    b_phi_b = np.where(np.isfinite(b), b * phi_b, 0.0)
    s = np.sqrt(var)
    d = x - mean
    slab = d * d * p - 2.0 * d * s * (phi_a - phi_b) + var * (p + a_phi_a - b_phi_b)
    return float(max(slab.sum(), 0.0))


def skellam_w2_to_gaussian(spacing: float, mu: float, var: float, tail: float = 1e-12) -> float:
    """Exact W2^2 between spacing * Skellam(mu, mu) and N(0, var), support cut at tail mass 1e-12"""
    law = stats.skellam(mu, mu)
    k_max = int(law.isf(tail / 2.0)) + 1
    k = np.arange(-k_max, k_max + 1)
    return discrete_w2_to_gaussian(spacing * k, law.pmf(k), 0.0, var)
