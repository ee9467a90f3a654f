"""
Building blocks shared by the experiment plugins
"""
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from processing.coupling import SkellamCdf, quantile_couple_to_gaussian
from processing.euler_scheme import SigmaFn, get_sigma
from processing.increment_gen import LevyTriplet, SmallJumpSum
from processing.levy_measure import INF, LevyMeasureSpec, TwoPointSymmetric, build_measure
from processing.statistics import fit_log_slope, mean_with_ci
from processing.wasserstein import skellam_w2_to_gaussian, w2_to_gaussian
from services.report_service import RateReport, ReportRow, SlopeCheck
from utils.helpers import parse_atoms


def build_nu(params: Dict[str, Any], **overrides) -> LevyMeasureSpec:
    values = {**params, **overrides}
    return build_measure(
        values.get('family', 'two-point'),
        eps0=values.get('eps0', 0.1),
        alpha=values.get('alpha', 1.5),
        c=values.get('c', 1.0),
        cutoff=values.get('cutoff', 1.0),
        atoms=parse_atoms(values.get('atoms', '')),
        levels=values.get('levels', 0),
    )


def build_triplet(params: Dict[str, Any], **overrides) -> LevyTriplet:
    return LevyTriplet(float(params.get('a', 0.0)), float(params.get('b', 0.0)), build_nu(params, **overrides))


def build_sigma(params: Dict[str, Any]) -> SigmaFn:
    name = params.get('sigma', 'clipped-sine')
    if name == 'constant':
        return get_sigma(name, c=params.get('sigma_level', 1.0))
    if name == 'rational':
        return get_sigma(name, scale=params.get('sigma_level', 1.0))
    return get_sigma(name, level=params.get('sigma_level', 0.8))


@dataclass(frozen=True)
class CltPoint:
    """W2^2(Y_t, N(0, t m2)) for the two-point measure at one (eps0, t)"""

    eps0: float
    t: float
    coupled: float
    ci: float
    sorted_estimate: float
    exact: float

    @property
    def bound_scale(self) -> float:
        """min(m4 / m2, t m2) = min(eps0^2, t) since m2 = 1"""
        return min(self.eps0 ** 2, self.t)


def clt_times(eps0: float, t_ratios: Sequence[float], absolute_times: Sequence[float]) -> List[float]:
    return sorted(set([r * eps0 * eps0 for r in t_ratios] + list(absolute_times)))


def clt_point(task: Tuple[float, float], rng: np.random.Generator, count: int, n_boot: int) -> CltPoint:
    """
    Sample Y_t exactly (Skellam lattice), couple it to N(0, t) by the quantile
    transform and average the squared gap; the sorted-matching estimate and
    the exact lattice value are carried along for comparison.
    """
    eps0, t = task
    nu = TwoPointSymmetric(eps0)
    y = SmallJumpSum(nu, INF, t).sample(count, rng)
    spacing, mu = eps0, nu.atom_weight * t
    g = quantile_couple_to_gaussian(y, 0.0, math.sqrt(t), SkellamCdf(spacing, mu), rng)
    coupled, ci = mean_with_ci((y - g) ** 2, rng, n_boot)
    sorted_estimate = w2_to_gaussian(y, 0.0, t, rng, n_boot=0).value_squared
    return CltPoint(eps0, t, coupled, ci, sorted_estimate, skellam_w2_to_gaussian(spacing, mu, t))


def run_clt_points(context, label: str, points: Sequence[Tuple[float, float]]) -> List[CltPoint]:
    count, n_boot = context.paths, context.bootstrap
    return context.pool.map(label, lambda task, rng: clt_point(task, rng, count, n_boot), points)


def clt_row(point: CltPoint, **extra) -> ReportRow:
    return ReportRow(point.eps0, point.coupled, point.ci, 0.0, {
        't': point.t,
        'regime': 'atom' if point.t <= point.eps0 ** 2 else 'lattice',
        'bound_scale': point.bound_scale,
        'w2_sorted': point.sorted_estimate,
        'w2_exact': point.exact,
        **extra,
    })


def slope_check(label: str, parameters, errors, kind: str = 'info', target=None,
                tolerance: float = 0.0) -> SlopeCheck:
    return SlopeCheck(label, fit_log_slope(parameters, errors), kind, target, tolerance)


def finish_report(name: str, rows, slopes: List[SlopeCheck], checks, notes, context,
                  exact: bool = True) -> RateReport:
    """The first slope is the headline fitted_slope of the report"""
    primary = slopes[0].fit if slopes else None
    return RateReport(
        experiment=name,
        rows=rows,
        fitted_slope=primary.slope if primary else math.nan,
        slope_ci=primary.slope_ci if primary else math.nan,
        checks=list(checks),
        slopes=slopes,
        notes=list(notes),
        exact=exact,
        assertions=context.assertions,
    )
