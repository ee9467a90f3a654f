"""
Increment-level coupling gap E[(Delta^n - Delta^{n,eps})^2] <= C delta_eps(nu)

The exact increment and the Gaussian-compensated increment share drift,
Brownian part and tail jumps; the small-jump sum is quantile-coupled to its
compensating Gaussian. Marginals are checked against independent draws of
the two generators with two-sample KS tests.
"""
import math
from typing import Any, Dict

import numpy as np
from loguru import logger
from scipy import stats

from config.schema import POSITIVE, POSITIVE_GRID, POSITIVE_INT, experiment_schema
from core.base_experiment import BaseExperiment, ExperimentContext
from experiments.common import finish_report, slope_check
from processing.coupling import IncrementCoupler
from processing.increment_gen import LevyTriplet, make_params, sample_exact, sample_gauss_compensated
from processing.levy_measure import TwoPointSymmetric, delta_eps
from processing.statistics import mean_with_ci
from services.report_service import CheckResult, ReportRow, dump_batch_csv


class CouplingGapExperiment(BaseExperiment):
    name = "coupling-gap"
    description = "Mean squared gap between coupled exact and Gaussian-compensated increments against delta_eps"
    grids = ['eps0_grid']

    @property
    def schema(self) -> Dict[str, Any]:
        return experiment_schema({
            'eps0_grid': POSITIVE_GRID,
            'n': POSITIVE_INT,
            'eps': POSITIVE,
            'a': {"type": "number"},
            'b': {"type": "number", "minimum": 0},
            'c_gap': POSITIVE,
            'slope_target': {"type": "number"},
            'slope_tolerance': POSITIVE,
            'ks_level': {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        }, required=['eps0_grid', 'n', 'eps', 'c_gap', 'slope_target', 'slope_tolerance', 'ks_level'])

    def execute(self, context: ExperimentContext):
        p = context.params
        n, eps = p['n'], p['eps']
        count, n_boot = context.paths, context.bootstrap

        def measure(eps0, rng):
            triplet = LevyTriplet(p.get('a', 0.0), p.get('b', 0.0), TwoPointSymmetric(eps0))
            batch = IncrementCoupler(triplet, n, eps, rng=rng, cdf_samples=context.cdf_samples).sample(count, rng)
            gap, ci = mean_with_ci(batch.gap_squared, rng, n_boot)
            exact_ref = sample_exact(triplet, n, count, rng).values
            approx_ref = sample_gauss_compensated(make_params(triplet, n, eps), count, rng).values
            return {
                'eps0': eps0,
                'triplet': triplet,
                'batch': batch,
                'gap': gap,
                'ci': ci,
                'ks_exact': stats.ks_2samp(batch.delta_exact, exact_ref).pvalue,
                'ks_approx': stats.ks_2samp(batch.delta_approx, approx_ref).pvalue,
            }

        results = context.pool.map(self.name, lambda eps0, rng: measure(eps0, rng), p['eps0_grid'])

        rows, checks = [], []
        for r in results:
            eps0, batch = r['eps0'], r['batch']
            delta = delta_eps(r['triplet'].nu, eps)
            bound = p['c_gap'] * delta
            checks.append(CheckResult(f"gap eps0={eps0:g}", r['gap'] <= bound, r['gap'], bound,
                                      f"c_gap={p['c_gap']:g}, delta_eps={delta:g}"))
            mean_target = r['triplet'].a / n
            for label, values in (('exact', batch.delta_exact), ('approx', batch.delta_approx)):
                sigma_mean = float(np.std(values)) / math.sqrt(values.size)
                deviation = abs(float(np.mean(values)) - mean_target)
                checks.append(CheckResult(f"mean {label} eps0={eps0:g}", deviation <= 4.0 * sigma_mean,
                                          deviation, 4.0 * sigma_mean, "|mean - a/n| within 4 sigma"))
            checks.append(CheckResult(f"ks exact eps0={eps0:g}", r['ks_exact'] >= p['ks_level'],
                                      r['ks_exact'], p['ks_level'], "two-sample KS p-value"))
            checks.append(CheckResult(f"ks approx eps0={eps0:g}", r['ks_approx'] >= p['ks_level'],
                                      r['ks_approx'], p['ks_level'], "two-sample KS p-value"))
            rows.append(ReportRow(eps0, r['gap'], r['ci'], 1.0 + float(batch.jump_counts.mean()), {
                'delta_eps': delta,
                'ratio': r['gap'] / delta,
                'ks_exact': r['ks_exact'],
                'ks_approx': r['ks_approx'],
            }))
            logger.info(f"eps0={eps0:g}: gap={r['gap']:.4g}, delta_eps={delta:.4g}, ratio={r['gap'] / delta:.3f}")
            if p.get('dump'):
                dump_batch_csv(context.out / self.name / f"batch_eps0_{eps0:g}.csv",
                               delta_exact=batch.delta_exact, delta_approx=batch.delta_approx,
                               jump_counts=batch.jump_counts)

        slope = slope_check("gap vs eps0", [r['eps0'] for r in results], [r['gap'] for r in results],
                            'band', p['slope_target'], p['slope_tolerance'])
        notes = [f"n={n}, eps={eps:g}; c_gap = {p['c_gap']:g} is an empirical ceiling"]
        return finish_report(self.name, rows, [slope], checks, notes, context)
