"""
Increment generators for Lévy-driven Euler schemes

Three increment laws over a step of length 1/n:

    EXACT              a/n + b B_{1/n} + compensated jumps       (finite activity only)
    NEGLECT            a_{n,eps} + b B_{1/n} + tail jumps         (small jumps dropped)
    GAUSS_COMPENSATED  a_{n,eps} + b_{n,eps} G + tail jumps       (small jumps -> Gaussian)

All compensation of the tail jumps lives in ``a_{n,eps}``: individual tail
jumps are added raw. Every batch records the number of simulated tail jumps
per sample, which is the cost driver of the scheme.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from loguru import logger
from scipy import optimize

from core.exceptions import InfiniteActivity, NeedsFiniteSmallActivity, ValidationError
from processing.levy_measure import (
    INF,
    CompoundPoissonAtoms,
    LevyMeasureSpec,
    TwoPointSymmetric,
    tail_first_moment,
    tail_mass,
)

# inner truncation ratio eps' = eps / INNER_TRUNCATION for infinite-activity small jumps
INNER_TRUNCATION = 64.0
# compound Poisson jumps held in memory at once
MAX_JUMPS_PER_DRAW = 2_000_000


@dataclass(frozen=True)
class LevyTriplet:
    """Drift a, Brownian coefficient b >= 0 and Lévy measure nu"""

    a: float
    b: float
    nu: LevyMeasureSpec

    def __post_init__(self):
        if self.b < 0:
            raise ValidationError(f"Brownian coefficient must be nonnegative, got {self.b}")

    @property
    def m2(self) -> float:
        return self.nu.band_abs_moment(2)

    @property
    def total_variance_rate(self) -> float:
        """b^2 + m2(nu), the variance of Z_1"""
        return self.b * self.b + self.m2


@dataclass(frozen=True)
class IncrementParams:
    """Step size 1/n and truncation level eps; derived coefficients are properties"""

    triplet: LevyTriplet
    n: int
    eps: float

    @property
    def m2_eps(self) -> float:
        return self.triplet.nu.band_abs_moment(2, 0.0, self.eps)

    @property
    def a_n_eps(self) -> float:
        return (self.triplet.a - tail_first_moment(self.triplet.nu, self.eps)) / self.n

    @property
    def b_n_eps(self) -> float:
        # with m_{2,eps} = 0 this is b / sqrt(n), the degenerate small-jump fallback
        return math.sqrt((self.triplet.b ** 2 + self.m2_eps) / self.n)

    @property
    def poisson_mean(self) -> float:
        return tail_mass(self.triplet.nu, self.eps) / self.n


class IncrementKind(Enum):
    EXACT = "exact"
    NEGLECT = "neglect"
    GAUSS_COMPENSATED = "gauss-compensated"


@dataclass(frozen=True)
class IncrementBatch:
    """i.i.d. samples of one increment law with per-sample tail-jump counts"""

    kind: IncrementKind
    values: np.ndarray
    jump_counts: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.jump_counts.shape:
            raise ValidationError("values and jump_counts must have equal length")

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def mean_cost(self) -> float:
        return 1.0 + float(self.jump_counts.mean())


def make_params(triplet: LevyTriplet, n: int, eps: float) -> IncrementParams:
    """Derive a_{n,eps}, b_{n,eps} and the tail Poisson mean for step 1/n"""
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if eps >= 1:
        logger.warning(f"eps={eps} lies outside (0, 1); using the same formulas")
    return IncrementParams(triplet, int(n), float(eps))


def feasible_inner_truncation(nu: LevyMeasureSpec, eps: float, dt: float, target: float = INNER_TRUNCATION,
                              jump_budget: float = INF) -> float:
    """
    Largest K <= target whose band (eps/K, eps] holds at most ``jump_budget``
    expected jumps over a step dt

    Finite activity below eps needs no inner truncation and gets the target.
    """
    if target <= 1.0:
        raise ValidationError(f"inner truncation must exceed 1, got {target}")
    if math.isfinite(nu.band_mass(0.0, eps)) or nu.band_mass(eps / target, eps) * dt <= jump_budget:
        return target
    inner = optimize.brentq(lambda lo: nu.band_mass(lo, eps) * dt - jump_budget, eps / target, eps,
                            xtol=1e-14 * eps)
    logger.debug(f"inner truncation at eps={eps:g}, dt={dt:g} capped at {eps / inner:.3g} by the jump budget")
    return eps / inner


def sample_compound_poisson(nu: LevyMeasureSpec, lo: float, hi: float, mean: float, count: int,
                            rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Raw (uncompensated) compound Poisson sums of nu on the band (lo, hi]; returns (sums, counts)

    Jumps are drawn in blocks of whole samples holding at most MAX_JUMPS_PER_DRAW
    jumps (a single sample may exceed it).
    """
    counts = rng.poisson(mean, size=count) if mean > 0 else np.zeros(count, dtype=np.int64)
    if int(counts.sum()) == 0:
        return np.zeros(count), counts
    offsets = np.concatenate([[0], np.cumsum(counts)])
    sums = np.zeros(count)
    start = 0
    while start < count:
        last = int(np.searchsorted(offsets, offsets[start] + MAX_JUMPS_PER_DRAW, side='right')) - 1
        stop = min(max(last, start + 1), count)
        block = counts[start:stop]
        jumps = nu.sample_band(lo, hi, int(block.sum()), rng)
        owners = np.repeat(np.arange(stop - start), block)
        sums[start:stop] = np.bincount(owners, weights=jumps, minlength=stop - start)
        start = stop
    return sums, counts


def sample_tail_sums(nu: LevyMeasureSpec, eps: float, dt: float, count: int,
                     rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Sum of the jumps larger than eps over a step dt; returns (sums, counts)"""
    return sample_compound_poisson(nu, eps, INF, tail_mass(nu, eps) * dt, count, rng)


def sample_gauss_compensated(params: IncrementParams, count: int,
                             rng: np.random.Generator) -> IncrementBatch:
    """i.i.d. draws of a_{n,eps} + b_{n,eps} G + sum_{i <= N} Y_i"""
    _check_count(count)
    gauss = rng.standard_normal(count)
    tail, counts = sample_tail_sums(params.triplet.nu, params.eps, 1.0 / params.n, count, rng)
    values = params.a_n_eps + params.b_n_eps * gauss + tail
    return IncrementBatch(IncrementKind.GAUSS_COMPENSATED, values, counts)


def sample_neglect(params: IncrementParams, count: int, rng: np.random.Generator) -> IncrementBatch:
    """Same as the Gaussian-compensated law without the small-jump Gaussian"""
    _check_count(count)
    gauss = rng.standard_normal(count)
    tail, counts = sample_tail_sums(params.triplet.nu, params.eps, 1.0 / params.n, count, rng)
    values = params.a_n_eps + params.triplet.b / math.sqrt(params.n) * gauss + tail
    return IncrementBatch(IncrementKind.NEGLECT, values, counts)


def sample_exact(triplet: LevyTriplet, n: int, count: int, rng: np.random.Generator) -> IncrementBatch:
    """Exact increment Z_{1/n} for a finite-activity measure"""
    _check_count(count)
    nu = triplet.nu
    if not nu.is_finite_activity:
        raise InfiniteActivity(f"{nu!r} has infinite total mass; exact increments unavailable")
    gauss = rng.standard_normal(count)
    jumps, counts = SmallJumpSum(nu, INF, 1.0 / n, strict=True).sample_with_counts(count, rng)
    values = triplet.a / n + triplet.b / math.sqrt(n) * gauss + jumps
    return IncrementBatch(IncrementKind.EXACT, values, counts)


class SmallJumpSum:
    """
    Compensated small-jump sum S = int_0^dt int_{|z| <= eps} z N~(ds, dz)

    Exact for measures of finite activity below eps: a Skellam lattice law for
    the two-point family, independent Poisson counts per atom for atom
    families. For infinite activity the band (eps', eps] with
    eps' = eps / inner_truncation (64 by default) is simulated as compound
    Poisson and the rest replaced by its Gaussian compensation; ``exact`` is
    then False.
    """

    def __init__(self, nu: LevyMeasureSpec, eps: float, dt: float, strict: bool = False,
                 inner_truncation: float = INNER_TRUNCATION):
        self.nu = nu
        self.eps = eps
        self.dt = dt
        self.inner_eps = eps / inner_truncation
        small_mass = nu.band_mass(0.0, eps)
        self.exact = math.isfinite(small_mass)
        if not self.exact:
            if strict:
                raise NeedsFiniteSmallActivity(
                    f"small jumps of {nu!r} below {eps} have infinite activity; "
                    "use the inner-truncation layer (strict=False)")
            logger.warning(f"small jumps of {nu.family} below eps={eps:g} approximated "
                           f"by inner truncation at {self.inner_eps:g}")
        self.empty = small_mass == 0.0

    @property
    def variance(self) -> float:
        """m_{2,eps}(nu) dt"""
        return self.nu.band_abs_moment(2, 0.0, self.eps) * self.dt

    @property
    def lattice(self):
        """(spacing, per-side Poisson mean) when S is eps0 times a Skellam variable"""
        if isinstance(self.nu, TwoPointSymmetric) and not self.empty:
            return self.nu.eps0, self.nu.atom_weight * self.dt
        return None

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return self.sample_with_counts(count, rng)[0]

    def sample_with_counts(self, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Draws of S with the number of simulated jumps behind each draw"""
        if self.empty:
            return np.zeros(count), np.zeros(count, dtype=np.int64)
        nu = self.nu
        if isinstance(nu, TwoPointSymmetric):
            spacing, mean = self.lattice
            up, down = rng.poisson(mean, size=count), rng.poisson(mean, size=count)
            return spacing * (up - down).astype(float), up + down
        if isinstance(nu, CompoundPoissonAtoms):
            z, lam = nu.band_atoms(0.0, self.eps)
            counts = rng.poisson(lam * self.dt, size=(count, z.size))
            return counts @ z - self.dt * float(lam @ z), counts.sum(axis=1)
        if self.exact:
            raw, counts = sample_compound_poisson(nu, 0.0, self.eps, nu.band_mass(0.0, self.eps) * self.dt,
                                                  count, rng)
            return raw - nu.band_first_moment(0.0, self.eps) * self.dt, counts
        gauss = rng.standard_normal(count)
        band_mean = nu.band_mass(self.inner_eps, self.eps) * self.dt
        raw, counts = sample_compound_poisson(nu, self.inner_eps, self.eps, band_mean, count, rng)
        inner_std = math.sqrt(nu.band_abs_moment(2, 0.0, self.inner_eps) * self.dt)
        return raw - nu.band_first_moment(self.inner_eps, self.eps) * self.dt + inner_std * gauss, counts


def _check_count(count: int):
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
