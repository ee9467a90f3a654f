"""
Shared-noise grid refinement

The exact solution of a Lévy-driven SDE is unavailable, so strong errors are
measured against an Euler path on a grid ``ref_factor`` times finer, driven
by the same Brownian increments and the same jumps. Coarse increments are
window sums of the fine ones. All state is streamed one fine step at a time
for a whole batch of paths; nothing of size (paths x fine steps) is stored.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from loguru import logger

from core.exceptions import ValidationError
from processing.coupling import DEFAULT_CDF_SAMPLES, RankCdf, quantile_couple_to_gaussian, small_jump_cdf
from processing.euler_scheme import EulerStepper, RunningSupTracker, SigmaFn, grid_steps
from processing.increment_gen import (
    INNER_TRUNCATION,
    LevyTriplet,
    SmallJumpSum,
    make_params,
    sample_tail_sums,
)
from processing.levy_measure import INF, tail_first_moment

REFERENCE_FACTOR = 64


@dataclass
class SchemeErrors:
    """Per-path squared sup gaps against the fine reference, and simulation cost"""

    scheme: np.ndarray
    euler: np.ndarray
    cost: np.ndarray
    exact: bool = True
    reference_steps: int = field(default=0)


def _check_refinement(n: int, n_ref: int):
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if n_ref % n:
        raise ValidationError(f"reference grid {n_ref} is not a refinement of n={n}")


def euler_refinement_errors(triplet: LevyTriplet, sigma: SigmaFn, x0: float, n_grid: Sequence[int],
                            horizon: float, count: int, rng: np.random.Generator,
                            ref_factor: int = REFERENCE_FACTOR) -> Dict[int, np.ndarray]:
    """
    E[sup_t |X_ref - X^n|^2] samples for every n in n_grid from one reference run

    The reference grid is ref_factor * max(n_grid); every coarse Euler path is
    driven by window sums of the reference increments, which are exact
    (finite activity is required).
    """
    n_ref = ref_factor * max(n_grid)
    for n in n_grid:
        _check_refinement(n, n_ref)
    dt = 1.0 / n_ref
    jumps = SmallJumpSum(triplet.nu, INF, dt, strict=True)
    steps = grid_steps(n_ref, horizon)
    logger.debug(f"euler refinement: n_ref={n_ref}, {steps} fine steps, {count} paths")

    reference = EulerStepper(x0, sigma, count)
    coarse = {n: EulerStepper(x0, sigma, count) for n in n_grid}
    pending = {n: np.zeros(count) for n in n_grid}
    trackers = {n: RunningSupTracker(count) for n in n_grid}
    drift, diffusion = triplet.a * dt, triplet.b * math.sqrt(dt)

    for i in range(1, steps + 1):
        increment = drift + diffusion * rng.standard_normal(count) + jumps.sample(count, rng)
        reference.step(increment)
        for n in n_grid:
            pending[n] += increment
            if i % (n_ref // n) == 0:
                trackers[n].update(reference.state, coarse[n].step(pending[n]))
                pending[n][:] = 0.0
    return {n: trackers[n].squared for n in n_grid}


def scheme_refinement_errors(triplet: LevyTriplet, sigma: SigmaFn, x0: float, n: int, eps: float,
                             horizon: float, count: int, rng: np.random.Generator,
                             ref_factor: int = REFERENCE_FACTOR, cdf: Optional[RankCdf] = None,
                             strict: bool = False,
                             cdf_samples: int = DEFAULT_CDF_SAMPLES,
                             inner_truncation: float = INNER_TRUNCATION) -> SchemeErrors:
    """
    Strong error of the Gaussian-compensated scheme at step 1/n against a
    reference Euler path at ref_factor * n

    Per coarse window the fine Brownian increments, small-jump sums and tail
    jumps are aggregated; the scheme uses the aggregated Brownian part and tail
    jumps as they are and replaces the aggregated small-jump sum S by its
    quantile-coupled Gaussian N(0, m_{2,eps}/n). The exact coarse Euler path
    (driven by the same window sums) is tracked too, which splits the error
    into its discretisation and small-jump parts.
    """
    params = make_params(triplet, n, eps)
    n_ref = ref_factor * n
    dt = 1.0 / n_ref
    fine_small = SmallJumpSum(triplet.nu, eps, dt, strict=strict, inner_truncation=inner_truncation)
    if cdf is None:
        coarse_small = SmallJumpSum(triplet.nu, eps, 1.0 / n, strict=strict, inner_truncation=inner_truncation)
        cdf = small_jump_cdf(coarse_small, rng, cdf_samples)
    coarse_std = math.sqrt(params.m2_eps / n)
    tail_comp = tail_first_moment(triplet.nu, eps)
    steps = grid_steps(n, horizon)
    logger.debug(f"scheme refinement: n={n}, eps={eps:g}, n_ref={n_ref}, {count} paths")

    reference = EulerStepper(x0, sigma, count)
    exact_coarse = EulerStepper(x0, sigma, count)
    scheme = EulerStepper(x0, sigma, count)
    scheme_sup = RunningSupTracker(count)
    euler_sup = RunningSupTracker(count)
    cost = np.zeros(count)
    diffusion = triplet.b * math.sqrt(dt)

    for _ in range(steps):
        brownian = np.zeros(count)
        small = np.zeros(count)
        tail = np.zeros(count)
        for _ in range(ref_factor):
            b_f = diffusion * rng.standard_normal(count)
            s_f = fine_small.sample(count, rng)
            t_f, counts = sample_tail_sums(triplet.nu, eps, dt, count, rng)
            reference.step(triplet.a * dt + b_f + s_f + t_f - tail_comp * dt)
            brownian += b_f
            small += s_f
            tail += t_f
            cost += counts
        gauss = quantile_couple_to_gaussian(small, 0.0, coarse_std, cdf, rng)
        exact_state = exact_coarse.step(triplet.a / n + brownian + small + tail - tail_comp / n)
        scheme_state = scheme.step(params.a_n_eps + brownian + gauss + tail)
        scheme_sup.update(reference.state, scheme_state)
        euler_sup.update(reference.state, exact_state)
    cost += steps
    return SchemeErrors(scheme_sup.squared, euler_sup.squared, cost, fine_small.exact, steps * ref_factor)
