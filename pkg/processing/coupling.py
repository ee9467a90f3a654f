"""
Constructive couplings

The Gaussian that replaces a small-jump sum is built as the quantile
(comonotone) transform of that sum, which is the W2-optimal coupling in one
dimension. Ranks come from a ``RankCdf``: the exact lattice CDF of the
two-point family (Skellam), or an empirical CDF of an independent reference
sample for every other family. Ties inside an atom are broken by a uniform
jitter, which keeps the ranks exactly uniform for atomic laws.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Protocol, Tuple, Union

import numpy as np
from loguru import logger
from scipy import stats

from core.exceptions import EmptyCdf, StreamExhausted, ValidationError
from processing.euler_scheme import (
    EulerStepper,
    PathGrid,
    RunningSupTracker,
    SigmaFn,
    euler_recursion,
    grid_steps,
)
from processing.increment_gen import (
    INNER_TRUNCATION,
    LevyTriplet,
    SmallJumpSum,
    make_params,
    sample_tail_sums,
)
from processing.levy_measure import INF
from processing.statistics import inverse_normal_cdf

DEFAULT_CDF_SAMPLES = 200_000


class RankCdf(Protocol):
    def ranks(self, samples: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Probability-integral transform of samples into (0, 1)"""


@dataclass(frozen=True)
class EmpiricalCdf:
    """Sorted reference sample; ranks use midpoint plotting positions (i - 0.5) / M"""

    sorted_samples: np.ndarray

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalCdf":
        samples = np.sort(np.asarray(samples, dtype=float).ravel())
        if samples.size == 0:
            raise EmptyCdf("cannot build a CDF from an empty sample")
        samples.setflags(write=False)
        return cls(samples)

    @property
    def sample_count(self) -> int:
        return int(self.sorted_samples.size)

    def ranks(self, samples: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        m = self.sample_count
        if m == 0:
            raise EmptyCdf("empty CDF")
        below = np.searchsorted(self.sorted_samples, samples, side='left')
        tied = np.searchsorted(self.sorted_samples, samples, side='right') - below
        jitter = rng.random(np.shape(samples))
        offset = np.where(tied > 1, jitter * tied, 0.5 * tied)
        return np.clip((below + offset) / m, 0.5 / m, 1.0 - 0.5 / m)


@dataclass(frozen=True)
class SkellamCdf:
    """Exact CDF of spacing * (P1 - P2), P1, P2 i.i.d. Poisson(mu)"""

    spacing: float
    mu: float

    def ranks(self, samples: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        k = np.rint(np.asarray(samples) / self.spacing)
        law = stats.skellam(self.mu, self.mu)
        below = law.cdf(k - 1)
        mass = law.pmf(k)
        return below + rng.random(np.shape(samples)) * mass


@dataclass(frozen=True)
class DegenerateCdf:
    """CDF of the constant 0; every rank is uniform"""

    def ranks(self, samples: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return rng.random(np.shape(samples))


def quantile_couple_to_gaussian(samples, target_mean: float, target_std: float, cdf: RankCdf,
                                rng: np.random.Generator) -> np.ndarray:
    """g = target_mean + target_std * Phi^-1(rank(s)); comonotone in s"""
    if target_std < 0:
        raise ValidationError(f"target_std must be nonnegative, got {target_std}")
    if isinstance(cdf, EmpiricalCdf) and cdf.sample_count == 0:
        raise EmptyCdf("empty CDF")
    samples = np.asarray(samples, dtype=float)
    return target_mean + target_std * inverse_normal_cdf(cdf.ranks(samples, rng))


def small_jump_cdf(small: SmallJumpSum, rng: np.random.Generator,
                   reference_samples: int = DEFAULT_CDF_SAMPLES) -> RankCdf:
    """Exact lattice CDF when available, otherwise the empirical CDF of a fresh reference sample"""
    if small.empty:
        return DegenerateCdf()
    if small.lattice is not None:
        spacing, mu = small.lattice
        return SkellamCdf(spacing, mu)
    logger.debug(f"building empirical small-jump CDF from {reference_samples} reference draws")
    return EmpiricalCdf.from_samples(small.sample(reference_samples, rng))


@dataclass(frozen=True)
class CoupledIncrementBatch:
    """Coupled draws of the exact increment and its approximation"""

    delta_exact: np.ndarray
    delta_approx: np.ndarray
    jump_counts: np.ndarray
    exact: bool = True
    delta_neglect: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (self.delta_exact.shape == self.delta_approx.shape == self.jump_counts.shape):
            raise ValidationError("coupled arrays must have equal shapes")

    def __len__(self) -> int:
        return int(self.delta_exact.shape[0])

    @property
    def gap_squared(self) -> np.ndarray:
        return (self.delta_exact - self.delta_approx) ** 2


class IncrementCoupler:
    """
    Draws coupled (Delta^n, Delta^{n,eps}) pairs sharing drift, Brownian part and
    tail jumps; the small-jump sum S of Delta^n is quantile-coupled to the
    N(0, m_{2,eps}/n) variable of Delta^{n,eps}.
    """

    def __init__(self, triplet: LevyTriplet, n: int, eps: float, rng: np.random.Generator,
                 cdf: Optional[RankCdf] = None, strict: bool = False,
                 cdf_samples: int = DEFAULT_CDF_SAMPLES, inner_truncation: float = INNER_TRUNCATION):
        self.params = make_params(triplet, n, eps)
        self.small = SmallJumpSum(triplet.nu, eps, 1.0 / n, strict=strict, inner_truncation=inner_truncation)
        if cdf is None:
            cdf = small_jump_cdf(self.small, rng, cdf_samples)
        self.cdf = cdf
        self.small_std = math.sqrt(self.small.variance)

    @property
    def exact(self) -> bool:
        return self.small.exact

    def sample(self, count: int, rng: np.random.Generator) -> CoupledIncrementBatch:
        p = self.params
        triplet = p.triplet
        brownian = triplet.b / math.sqrt(p.n) * rng.standard_normal(count)
        tail, counts = sample_tail_sums(triplet.nu, p.eps, 1.0 / p.n, count, rng)
        small = self.small.sample(count, rng)
        gauss = quantile_couple_to_gaussian(small, 0.0, self.small_std, self.cdf, rng)
        common = p.a_n_eps + brownian + tail
        return CoupledIncrementBatch(common + small, common + gauss, counts, self.small.exact,
                                     delta_neglect=common)


def sample_coupled_increment(triplet: LevyTriplet, n: int, eps: float, count: int,
                             small_jump_cdf: Optional[RankCdf], rng: np.random.Generator,
                             strict: bool = False) -> CoupledIncrementBatch:
    """One batch of coupled (Delta^n, Delta^{n,eps}) pairs"""
    return IncrementCoupler(triplet, n, eps, rng, small_jump_cdf, strict).sample(count, rng)


class BrownianCoupler:
    """
    Couples the full Lévy increment Z_{1/n} to a + sqrt(b^2 + m2) W_{1/n}:
    drift and Brownian part are shared, the compensated jump part is
    quantile-coupled to N(0, m2/n).
    """

    def __init__(self, triplet: LevyTriplet, n: int, rng: np.random.Generator,
                 cdf: Optional[RankCdf] = None, cdf_samples: int = DEFAULT_CDF_SAMPLES):
        if n < 1:
            raise ValidationError(f"n must be >= 1, got {n}")
        self.triplet = triplet
        self.n = n
        self.jumps = SmallJumpSum(triplet.nu, INF, 1.0 / n, strict=True)
        if cdf is None:
            cdf = small_jump_cdf(self.jumps, rng, cdf_samples)
        self.cdf = cdf
        self.jump_std = math.sqrt(self.jumps.variance)

    @property
    def diffusion_coefficient(self) -> float:
        """sqrt(b^2 + m2(nu)) of the approximating Brownian SDE"""
        return math.sqrt(self.triplet.total_variance_rate)

    def sample(self, count: int, rng: np.random.Generator) -> CoupledIncrementBatch:
        t = self.triplet
        brownian = t.b / math.sqrt(self.n) * rng.standard_normal(count)
        jumps = self.jumps.sample(count, rng)
        gauss = quantile_couple_to_gaussian(jumps, 0.0, self.jump_std, self.cdf, rng)
        drift = t.a / self.n
        return CoupledIncrementBatch(drift + brownian + jumps, drift + brownian + gauss,
                                     np.zeros(count, dtype=np.int64))


def sample_coupled_brownian_increment(triplet: LevyTriplet, n: int, count: int,
                                      increment_cdf: Optional[RankCdf],
                                      rng: np.random.Generator) -> CoupledIncrementBatch:
    """One batch of coupled (Delta^n, Delta~^n) pairs"""
    return BrownianCoupler(triplet, n, rng, increment_cdf).sample(count, rng)


def _concatenate(coupled: Union[CoupledIncrementBatch, Iterable[CoupledIncrementBatch]], steps: int):
    batches = [coupled] if isinstance(coupled, CoupledIncrementBatch) else coupled
    exact, approx, total = [], [], 0
    for batch in batches:
        if total >= steps:
            break
        exact.append(batch.delta_exact)
        approx.append(batch.delta_approx)
        total += len(batch)
    if total < steps:
        raise StreamExhausted(f"coupled stream ended after {total} of {steps} increments")
    return np.concatenate(exact)[:steps], np.concatenate(approx)[:steps]


def simulate_coupled_paths(x0: float, sigma: SigmaFn,
                           coupled: Union[CoupledIncrementBatch, Iterable[CoupledIncrementBatch]],
                           n: int, horizon: float) -> Tuple[PathGrid, PathGrid]:
    """Euler paths driven by delta_exact and delta_approx of one coupled stream, in lockstep"""
    steps = grid_steps(n, horizon)
    exact, approx = _concatenate(coupled, steps)
    states = euler_recursion(x0, sigma, np.stack([exact, approx]))
    return PathGrid(n, horizon, states[0]), PathGrid(n, horizon, states[1])


def coupled_running_sup(x0: float, sigma: SigmaFn, step_batches: Iterator[CoupledIncrementBatch],
                        steps: int) -> np.ndarray:
    """
    Streaming variant: each batch carries one time step for a whole set of
    path pairs; returns the per-pair squared sup gap over the grid.
    """
    tracker = None
    exact_path = approx_path = None
    for i in range(steps):
        try:
            batch = next(step_batches)
        except StopIteration:
            raise StreamExhausted(f"coupled stream ended after {i} of {steps} steps")
        if tracker is None:
            tracker = RunningSupTracker(len(batch))
            exact_path = EulerStepper(x0, sigma, len(batch))
            approx_path = EulerStepper(x0, sigma, len(batch))
        tracker.update(exact_path.step(batch.delta_exact), approx_path.step(batch.delta_approx))
    return tracker.squared if tracker is not None else np.zeros(0)
