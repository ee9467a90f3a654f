"""
Strong error of the Gaussian-compensated Euler scheme, C_T (1/n + n delta_eps)

With eps = 1/n both addends are O(1/n). The reference solution is an Euler
path on a 64x finer grid sharing Brownian increments, small jumps and tail
jumps with the scheme; the small-jump sum of each coarse step is replaced by
its quantile-coupled Gaussian.
"""
from typing import Any, Dict

import numpy as np
from loguru import logger

from config.schema import (
    INT_GRID,
    MEASURE_PROPERTIES,
    PATH_PROPERTIES,
    POSITIVE,
    POSITIVE_INT,
    experiment_schema,
)
from core.base_experiment import BaseExperiment, ExperimentContext
from core.exceptions import DegenerateSmallJumps
from experiments.common import build_sigma, build_triplet, finish_report, slope_check
from processing.coupling import small_jump_cdf
from processing.increment_gen import INNER_TRUNCATION, SmallJumpSum
from processing.levy_measure import delta_eps
from processing.refinement import SchemeErrors, euler_refinement_errors, scheme_refinement_errors
from processing.statistics import mean_with_ci, normal_half_width
from services.report_service import CheckResult, ReportRow
from services.task_pool import split_paths


class SchemeRateExperiment(BaseExperiment):
    name = "scheme-rate"
    description = "Strong error of the Gaussian-compensated scheme with eps = 1/n against a refined reference"
    grids = ['n_grid']

    @property
    def schema(self) -> Dict[str, Any]:
        return experiment_schema({
            **MEASURE_PROPERTIES,
            **PATH_PROPERTIES,
            'n_grid': INT_GRID,
            'eps_rule': {"type": "string", "enum": ["inverse", "fixed"]},
            'eps': POSITIVE,
            'ref_factor': POSITIVE_INT,
            'inner_truncation': {"type": "number", "exclusiveMinimum": 1},
            'slope_ceiling': {"type": "number"},
            'null_check': {"type": "boolean"},
        }, required=['n_grid', 'eps_rule', 'ref_factor', 'slope_ceiling'])

    def execute(self, context: ExperimentContext):
        p = context.params
        triplet = build_triplet(p)
        n_grid = sorted(p['n_grid'])
        eps_of = (lambda n: 1.0 / n) if p['eps_rule'] == 'inverse' else (lambda n: p['eps'])
        results = self._measure(context, triplet, n_grid, eps_of)

        rng = context.rng(self.name, 'bootstrap')
        rows, scheme_means, euler_means = [], [], []
        exact = True
        for n in n_grid:
            errors = results[n]
            exact = exact and errors.exact
            mse, ci = mean_with_ci(errors.scheme, rng, context.bootstrap)
            euler_mse, euler_ci = mean_with_ci(errors.euler, rng, context.bootstrap)
            scheme_means.append(mse)
            euler_means.append(euler_mse)
            eps = eps_of(n)
            try:
                delta = delta_eps(triplet.nu, eps)
            except DegenerateSmallJumps:
                delta = 0.0
            rows.append(ReportRow(n, mse, ci, float(errors.cost.mean()), {
                'eps': eps,
                'euler_mse': euler_mse,
                'euler_ci': euler_ci,
                'predicted_discretization': 1.0 / n,
                'predicted_small_jump': n * delta,
                'exact': errors.exact,
            }))
            logger.info(f"n={n} eps={eps:g}: scheme MSE={mse:.4g} (+/- {ci:.2g}), euler part {euler_mse:.4g}")

        slopes = [
            slope_check("scheme MSE vs n", n_grid, scheme_means, 'ceiling', p['slope_ceiling']),
            slope_check("exact-increment Euler MSE vs n (same reference)", n_grid, euler_means, 'info'),
        ]
        checks = []
        if p.get('null_check'):
            checks.append(self._null_check(context, n_grid[0], eps_of))
        notes = [
            f"reference: Euler at {p['ref_factor']}x finer grid with shared noise; bias O(1/n_ref)",
            f"eps rule: {p['eps_rule']}; slope ceiling {p['slope_ceiling']:g} is an empirical ceiling",
        ]
        return finish_report(self.name, rows, slopes, checks, notes, context, exact=exact)

    def _measure(self, context, triplet, n_grid, eps_of, label=None) -> Dict[int, SchemeErrors]:
        p = context.params
        label = label or self.name
        sigma = build_sigma(p)
        inner = p.get('inner_truncation', INNER_TRUNCATION)
        cdfs = {}
        for n in n_grid:
            small = SmallJumpSum(triplet.nu, eps_of(n), 1.0 / n, inner_truncation=inner)
            cdfs[n] = small_jump_cdf(small, context.rng(label, 'cdf', n), context.cdf_samples)
        tasks = [(n, size) for n in n_grid for size in split_paths(context.paths, context.chunk)]

        def task(item, rng):
            n, size = item
            return scheme_refinement_errors(triplet, sigma, p.get('x0', 0.0), n, eps_of(n), context.horizon,
                                            size, rng, p['ref_factor'], cdfs[n], inner_truncation=inner)

        chunks = context.pool.map(label, task, tasks)
        merged = {}
        for n in n_grid:
            parts = [c for (m, _), c in zip(tasks, chunks) if m == n]
            merged[n] = SchemeErrors(np.concatenate([c.scheme for c in parts]),
                                     np.concatenate([c.euler for c in parts]),
                                     np.concatenate([c.cost for c in parts]),
                                     all(c.exact for c in parts), parts[0].reference_steps)
        return merged

    def _null_check(self, context, n, eps_of) -> CheckResult:
        """
        With nu = 0 the scheme is the exact-increment Euler scheme; its error
        must match an independent euler-baseline run at the same n and
        reference factor within the combined CI
        """
        p = context.params
        null = build_triplet({**p, 'family': 'none'})
        scheme_errors = self._measure(context, null, [n], eps_of, f"{self.name}/null")[n].scheme
        sigma, x0, ref_factor = build_sigma(p), p.get('x0', 0.0), p['ref_factor']

        def task(size, rng):
            return euler_refinement_errors(null, sigma, x0, [n], context.horizon, size, rng, ref_factor)[n]

        chunks = context.pool.map(f"{self.name}/null-baseline", task, split_paths(context.paths, context.chunk))
        baseline_errors = np.concatenate(chunks)
        rng = context.rng(self.name, 'null-bootstrap')
        scheme, scheme_ci = mean_with_ci(scheme_errors, rng, context.bootstrap)
        baseline, baseline_ci = mean_with_ci(baseline_errors, rng, context.bootstrap)
        if not context.bootstrap:
            scheme_ci, baseline_ci = normal_half_width(scheme_errors), normal_half_width(baseline_errors)
        tolerance = scheme_ci + baseline_ci
        return CheckResult(f"nu=0 reduces to euler baseline at n={n}", abs(scheme - baseline) <= tolerance,
                           abs(scheme - baseline), tolerance,
                           f"scheme {scheme:.4g} vs independent euler baseline {baseline:.4g}")
