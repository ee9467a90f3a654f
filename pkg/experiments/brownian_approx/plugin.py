"""
Jump SDE against its Brownian approximation when nu lives in {|z| <= eps}

X is driven by Z, X~ by a t + sqrt(b^2 + m2(nu)) W. Both are Euler paths on
the internal grid n(eps); the compensated jump part of every step of Z is
quantile-coupled to the extra Gaussian of X~. The squared sup gap should
shrink like eps^(1 - eta).

With eps0_ratio = 0 the two drivers coincide, so the rows instead report the
Euler floor: X~ on n(eps) against X~ on 2 n(eps) with shared noise.
"""
import math
from typing import Any, Dict

import numpy as np
from loguru import logger

from config.schema import NONNEGATIVE, PATH_PROPERTIES, POSITIVE_GRID, experiment_schema
from core.base_experiment import BaseExperiment, ExperimentContext
from core.exceptions import HypothesisViolation
from experiments.common import build_sigma, finish_report, slope_check
from processing.coupling import BrownianCoupler, coupled_running_sup, simulate_coupled_paths
from processing.euler_scheme import grid_steps
from processing.increment_gen import LevyTriplet
from processing.levy_measure import CompoundPoissonAtoms, TwoPointSymmetric, tail_mass
from processing.refinement import euler_refinement_errors
from processing.statistics import mean_with_ci
from services.report_service import CheckResult, ReportRow
from services.task_pool import split_paths


def internal_steps(eps: float, p: float = 8.0, discretization: str = 'eps-power', m4: float = 0.0) -> int:
    """n(eps) = ceil(eps^(-p/(p-1))), or floor(m4^(-2/3)) for the m4 rule"""
    if discretization == 'm4' and m4 > 0.0:
        if m4 > 1.0:
            raise HypothesisViolation(f"the m4 discretization needs m4(nu) <= 1, got {m4:g}")
        return max(1, math.floor(m4 ** (-2.0 / 3.0)))
    if p <= 1.0:
        raise HypothesisViolation(f"moment order p must exceed 1, got {p:g}")
    return max(1, math.ceil(eps ** (-p / (p - 1.0)) - 1e-9))


class BrownianApproxExperiment(BaseExperiment):
    name = "brownian-approx"
    description = "Coupled strong error between a small-jump SDE and its Brownian approximation"
    grids = ['eps_grid']

    @property
    def schema(self) -> Dict[str, Any]:
        return experiment_schema({
            **PATH_PROPERTIES,
            'eps_grid': POSITIVE_GRID,
            'eps0_ratio': NONNEGATIVE,
            'p': {"type": "number", "exclusiveMinimum": 1},
            'discretization': {"type": "string", "enum": ["eps-power", "m4"]},
            'a': {"type": "number"},
            'b': NONNEGATIVE,
            'slope_floor': {"type": "number"},
        }, required=['eps_grid', 'slope_floor'])

    @staticmethod
    def triplet_for(p: Dict[str, Any], eps: float) -> LevyTriplet:
        ratio = p.get('eps0_ratio', 1.0)
        nu = TwoPointSymmetric(ratio * eps) if ratio > 0 else CompoundPoissonAtoms(())
        if tail_mass(nu, eps) > 0.0:
            raise HypothesisViolation(f"nu has mass beyond eps={eps:g} (eps0_ratio={ratio:g}); "
                                      f"the Brownian approximation needs nu supported in [-eps, eps]")
        return LevyTriplet(float(p.get('a', 0.0)), float(p.get('b', 0.0)), nu)

    def execute(self, context: ExperimentContext):
        p = context.params
        sigma = build_sigma(p)
        x0, horizon = p.get('x0', 0.0), context.horizon
        eps_grid = list(p['eps_grid'])
        triplets = {eps: self.triplet_for(p, eps) for eps in eps_grid}
        steps_of = {eps: internal_steps(eps, p.get('p', 8.0), p.get('discretization', 'eps-power'),
                                        triplets[eps].nu.band_abs_moment(4)) for eps in eps_grid}
        couplers = {eps: BrownianCoupler(triplets[eps], steps_of[eps], rng=context.rng(self.name, 'cdf', i),
                                         cdf_samples=context.cdf_samples)
                    for i, eps in enumerate(eps_grid)}

        null = p.get('eps0_ratio', 1.0) == 0
        tasks = [(eps, size) for eps in eps_grid for size in split_paths(context.paths, context.chunk)]

        def task(item, rng):
            eps, size = item
            coupler = couplers[eps]
            if null:
                return euler_refinement_errors(triplets[eps], sigma, x0, [coupler.n], horizon, size, rng,
                                               ref_factor=2)[coupler.n]
            steps = grid_steps(coupler.n, horizon)
            batches = (coupler.sample(size, rng) for _ in range(steps))
            return coupled_running_sup(x0, sigma, batches, steps)

        chunks = context.pool.map(self.name, task, tasks)
        rng = context.rng(self.name, 'bootstrap')
        rows, means, checks = [], [], []
        for eps in eps_grid:
            errors = np.concatenate([c for (e, _), c in zip(tasks, chunks) if e == eps])
            mse, ci = mean_with_ci(errors, rng, context.bootstrap)
            means.append(mse)
            coupler, n = couplers[eps], steps_of[eps]
            m2 = triplets[eps].m2
            rows.append(ReportRow(eps, mse, ci, float(grid_steps(n, horizon)), {
                'n': n,
                'eps0': triplets[eps].nu.support_radius(),
                'm2': m2,
                'diffusion_coefficient': coupler.diffusion_coefficient,
            }))
            logger.info(f"eps={eps:g} n={n}: MSE={mse:.4g} (+/- {ci:.2g})")
            checks.append(self._variance_check(context, eps, coupler))

        if null:
            checks.append(CheckResult("nu=0 floor", means[-1] < means[0], means[-1], means[0],
                                      "no jumps: Euler on n(eps) against 2 n(eps) with shared noise"))
        slopes = [slope_check("MSE vs eps", eps_grid, means, 'floor', p['slope_floor'])]
        notes = [f"internal grid n(eps) by {p.get('discretization', 'eps-power')} rule, p={p.get('p', 8.0):g}",
                 f"slope floor {p['slope_floor']:g} is an empirical ceiling on eta"]
        if null:
            notes.append("nu = 0: error is the Euler floor of the Brownian SDE, n(eps) against 2 n(eps)")
        if p.get('dump'):
            self._dump_pair(context, eps_grid[-1], couplers[eps_grid[-1]], sigma, x0)
        return finish_report(self.name, rows, slopes, checks, notes, context)

    def _variance_check(self, context, eps, coupler) -> CheckResult:
        """One-step variance of the Brownian increment is (b^2 + m2) / n"""
        rng = context.rng(self.name, 'variance', repr(eps))
        batch = coupler.sample(context.paths, rng)
        target = coupler.diffusion_coefficient ** 2 / coupler.n
        observed = float(np.var(batch.delta_approx, ddof=1))
        band = 4.0 * target * math.sqrt(2.0 / max(context.paths - 1, 1))
        return CheckResult(f"variance eps={eps:g}", abs(observed - target) <= band, observed, target,
                           f"|var - (b^2 + m2)/n| within {band:.3g}")

    def _dump_pair(self, context, eps, coupler, sigma, x0):
        rng = context.rng(self.name, 'dump')
        steps = grid_steps(coupler.n, context.horizon)
        jump_path, brownian_path = simulate_coupled_paths(x0, sigma, coupler.sample(steps, rng), coupler.n,
                                                          context.horizon)
        out = context.out / self.name
        jump_path.to_csv(out / f"path_jump_eps_{eps:g}.csv")
        brownian_path.to_csv(out / f"path_brownian_eps_{eps:g}.csv")
