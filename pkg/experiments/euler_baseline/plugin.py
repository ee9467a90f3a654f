"""
Euler scheme with exact increments: E[sup_t |X_{rho_n(t)} - X^n_{rho_n(t)}|^2] <= C_T / n

The true solution is replaced by an Euler path on a 64x finer grid driven by
the same Brownian increments and jumps; its own error O(1 / n_ref) is a bias
on every row.
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
from experiments.common import build_sigma, build_triplet, finish_report, slope_check
from processing.refinement import euler_refinement_errors
from processing.statistics import mean_with_ci
from services.report_service import CheckResult, ReportRow
from services.task_pool import split_paths

# squared sup gaps below this are roundoff (constant sigma telescopes exactly)
ROUNDOFF_FLOOR = 1e-20


class EulerBaselineExperiment(BaseExperiment):
    name = "euler-baseline"
    description = "Strong error of the exact-increment Euler scheme against shared-noise refinement"
    grids = ['n_grid']

    @property
    def schema(self) -> Dict[str, Any]:
        return experiment_schema({
            **MEASURE_PROPERTIES,
            **PATH_PROPERTIES,
            'n_grid': INT_GRID,
            'ref_factor': POSITIVE_INT,
            'slope_target': {"type": "number"},
            'slope_tolerance': POSITIVE,
            'horizon_check': {"type": "boolean"},
        }, required=['n_grid', 'ref_factor', 'slope_target', 'slope_tolerance'])

    def execute(self, context: ExperimentContext):
        p = context.params
        triplet = build_triplet(p)
        sigma = build_sigma(p)
        n_grid = sorted(p['n_grid'])
        x0, horizon, ref_factor = p.get('x0', 0.0), context.horizon, p['ref_factor']

        def errors_for(grid, T, label):
            def task(size, rng):
                return euler_refinement_errors(triplet, sigma, x0, grid, T, size, rng, ref_factor)
            chunks = context.pool.map(label, task, split_paths(context.paths, context.chunk))
            return {n: np.concatenate([c[n] for c in chunks]) for n in grid}

        errors = errors_for(n_grid, horizon, self.name)
        rng = context.rng(self.name, 'bootstrap')
        rows, means = [], []
        for n in n_grid:
            mse, ci = mean_with_ci(errors[n], rng, context.bootstrap)
            means.append(mse)
            rows.append(ReportRow(n, mse, ci, float(n * horizon),
                                  {'n_ref': ref_factor * max(n_grid), 'horizon': horizon}))
            logger.info(f"n={n}: MSE={mse:.4g} (+/- {ci:.2g})")

        checks = []
        notes = [f"reference: Euler at n_ref={ref_factor * max(n_grid)} with shared noise; "
                 f"bias O(1/n_ref) on every row",
                 f"sigma={sigma.name}, measure={triplet.nu.family}"]
        if sigma.is_constant:
            worst = max(means)
            checks.append(CheckResult("constant sigma telescopes", worst <= ROUNDOFF_FLOOR, worst, ROUNDOFF_FLOOR))
            slope = slope_check("MSE vs n", n_grid, means, 'info')
        else:
            slope = slope_check("MSE vs n", n_grid, means, 'band', p['slope_target'], p['slope_tolerance'])

        if p.get('horizon_check') and not sigma.is_constant:
            n0 = n_grid[0]
            doubled = errors_for([n0], 2.0 * horizon, f"{self.name}/doubled-horizon")[n0]
            mse2, ci2 = mean_with_ci(doubled, rng, context.bootstrap)
            rows.append(ReportRow(n0, mse2, ci2, float(n0 * 2.0 * horizon),
                                  {'n_ref': ref_factor * n0, 'horizon': 2.0 * horizon}))
            checks.append(CheckResult(f"MSE grows with horizon at n={n0}", mse2 > means[0], mse2, means[0],
                                      f"T={2.0 * horizon:g} vs T={horizon:g}"))
        return finish_report(self.name, rows, [slope], checks, notes, context)
