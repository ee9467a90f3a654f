"""
CLT lower bound for the two-point measure: W2^2(Y_t, N(0, t)) >= c min(t, eps0^2)

For t <= eps0^2 the atom of Y_t at zero carries mass at least exp(-t / eps0^2);
for t >= eps0^2 the lattice eps0 Z stays at distance of order eps0 from a
Gaussian. Both regimes are checked, and the slope of W2^2 against t in the
atom regime is fitted (target 1).
"""
from typing import Any, Dict

from loguru import logger

from config.schema import POSITIVE, POSITIVE_GRID, experiment_schema
from core.base_experiment import BaseExperiment, ExperimentContext
from experiments.common import clt_row, clt_times, finish_report, run_clt_points, slope_check
from services.report_service import CheckResult


class CltLowerBoundExperiment(BaseExperiment):
    name = "clt-lower-bound"
    description = "Lower bound c min(t, eps0^2) on the W2 distance of the lattice process to its Gaussian limit"
    grids = ['eps0_grid', 't_ratios', 'absolute_times', 'slope_t_ratios']

    @property
    def schema(self) -> Dict[str, Any]:
        return experiment_schema({
            'eps0_grid': POSITIVE_GRID,
            't_ratios': POSITIVE_GRID,
            'absolute_times': POSITIVE_GRID,
            'c_floor': POSITIVE,
            'slope_eps0': POSITIVE,
            'slope_t_ratios': POSITIVE_GRID,
            'slope_target': {"type": "number"},
            'slope_tolerance': POSITIVE,
        }, required=['eps0_grid', 't_ratios', 'absolute_times', 'c_floor', 'slope_eps0', 'slope_t_ratios',
                     'slope_target', 'slope_tolerance'])

    def execute(self, context: ExperimentContext):
        p = context.params
        grid = [(eps0, t) for eps0 in p['eps0_grid']
                for t in clt_times(eps0, p['t_ratios'], p['absolute_times'])]
        eps0 = p['slope_eps0']
        small_t = [(eps0, r * eps0 * eps0) for r in p['slope_t_ratios']]
        results = run_clt_points(context, self.name, grid + small_t)
        grid_results, small_t_results = results[:len(grid)], results[len(grid):]

        rows, checks = [], []
        for point in grid_results:
            floor = p['c_floor'] * point.bound_scale
            regime = 'atom' if point.t <= point.eps0 ** 2 else 'lattice'
            checks.append(CheckResult(f"lower eps0={point.eps0:g} t={point.t:g}", point.coupled >= floor,
                                      point.coupled, floor, f"{regime} regime, c_floor={p['c_floor']:g}"))
            rows.append(clt_row(point, floor=floor, series='grid'))
            logger.info(f"eps0={point.eps0:g} t={point.t:g}: W2^2={point.coupled:.4g}, floor {floor:.4g}")
        for point in small_t_results:
            rows.append(clt_row(point, floor=p['c_floor'] * point.bound_scale, series='small-t'))

        slope = slope_check(f"W2^2 vs t at eps0={eps0:g}, t <= eps0^2",
                            [r.t for r in small_t_results], [r.coupled for r in small_t_results],
                            'band', p['slope_target'], p['slope_tolerance'])
        notes = [f"c_floor = {p['c_floor']:g} is an empirical floor"]
        return finish_report(self.name, rows, [slope], checks, notes, context)
