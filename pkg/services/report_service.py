"""
Report Service - rate tables, fitted slopes and plot scripts
"""
import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from loguru import logger

from core.exceptions import ValidationError
from processing.statistics import RateFit
from utils.helpers import verdict

CORE_COLUMNS = ['param', 'error', 'ci', 'cost']


@dataclass
class ReportRow:
    """One grid point: parameter value, error estimate, CI half-width, mean cost"""

    param: float
    error: float
    ci: float
    cost: float
    extra: Dict[str, Any] = field(default_factory=dict)


@dataclass
class CheckResult:
    """A pointwise assertion: observed value against an empirical threshold"""

    name: str
    passed: bool
    observed: float
    threshold: float
    detail: str = ""


@dataclass
class SlopeCheck:
    """
    A fitted log-log slope and its pass criterion

    kind is 'band' (|slope - target| <= tolerance), 'ceiling' (slope <= target),
    'floor' (slope >= target) or 'info' (reported only).
    """

    label: str
    fit: RateFit
    kind: str = 'info'
    target: Optional[float] = None
    tolerance: float = 0.0

    @property
    def passed(self) -> bool:
        if self.fit.is_degenerate:
            return self.kind == 'info'
        slope = self.fit.slope
        if self.kind == 'band':
            return abs(slope - self.target) <= self.tolerance
        if self.kind == 'ceiling':
            return slope <= self.target
        if self.kind == 'floor':
            return slope >= self.target
        return True

    def criterion(self) -> str:
        if self.kind == 'band':
            return f"target {self.target:g} +/- {self.tolerance:g}"
        if self.kind == 'ceiling':
            return f"slope <= {self.target:g}"
        if self.kind == 'floor':
            return f"slope >= {self.target:g}"
        return "reported only"


@dataclass
class RateReport:
    """Per-experiment table of grid rows, fitted slopes and assertion results"""

    experiment: str
    rows: List[ReportRow]
    fitted_slope: float
    slope_ci: float
    checks: List[CheckResult] = field(default_factory=list)
    slopes: List[SlopeCheck] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    exact: bool = True
    assertions: bool = True

    @property
    def passed(self) -> bool:
        if not self.assertions:
            return True
        return all(c.passed for c in self.checks) and all(s.passed for s in self.slopes)

    @property
    def failures(self) -> List[str]:
        failed = [c.name for c in self.checks if not c.passed]
        return failed + [s.label for s in self.slopes if not s.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'experiment': self.experiment,
            'fitted_slope': self.fitted_slope,
            'slope_ci': self.slope_ci,
            'passed': self.passed,
            'exact': self.exact,
            'rows': [asdict(r) for r in self.rows],
            'checks': [asdict(c) for c in self.checks],
            'notes': list(self.notes),
        }


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class ReportService:
    """Writes report.csv, slopes.txt and plot.gp for a finished experiment"""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def report_dir(self, experiment: str) -> Path:
        return self.out_dir / experiment

    def write(self, report: RateReport) -> Path:
        directory = self.report_dir(report.experiment)
        directory.mkdir(parents=True, exist_ok=True)
        self.write_csv(report, directory / 'report.csv')
        self.write_slopes(report, directory / 'slopes.txt')
        self.write_plot(report, directory / 'plot.gp')
        logger.info(f"Report for {report.experiment} written to {directory}")
        return directory

    @staticmethod
    def columns(report: RateReport) -> List[str]:
        extra: List[str] = []
        for row in report.rows:
            extra.extend(k for k in row.extra if k not in extra)
        return CORE_COLUMNS + extra

    def write_csv(self, report: RateReport, path: Path) -> Path:
        columns = self.columns(report)
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(columns)
            for row in report.rows:
                values = {'param': row.param, 'error': row.error, 'ci': row.ci, 'cost': row.cost, **row.extra}
                writer.writerow([_cell(values.get(c, '')) for c in columns])
        return path

    def write_slopes(self, report: RateReport, path: Path) -> Path:
        lines = [f"# {note}" for note in report.notes]
        if not report.exact:
            lines.append("# approximation layer: small jumps below the inner truncation level replaced "
                         "by their Gaussian compensation")
        lines.append("# thresholds are empirical ceilings, not constants of the bounds being checked")
        for slope in report.slopes:
            fit = slope.fit
            if fit.is_degenerate:
                lines.append(f"{slope.label}: slope = nan (zero-error floor) "
                             f"[{slope.criterion()}] {verdict(slope.passed)}")
            else:
                lines.append(f"{slope.label}: slope = {fit.slope:.4f} +/- {fit.slope_ci:.4f} "
                             f"(n={fit.points}) [{slope.criterion()}] {verdict(slope.passed)}")
        for check in report.checks:
            detail = f" ({check.detail})" if check.detail else ""
            lines.append(f"check {check.name}: observed {check.observed:.6g} vs {check.threshold:.6g}{detail} "
                         f"{verdict(check.passed)}")
        if not report.assertions:
            lines.append("assertions disabled")
        lines.append(f"overall: {verdict(report.passed)}")
        path.write_text('\n'.join(lines) + '\n')
        return path

    def write_plot(self, report: RateReport, path: Path) -> Path:
        slope = report.fitted_slope
        fitted = "" if math.isnan(slope) else f" # fitted slope {slope:.4f}"
        script = "\n".join([
            "set datafile separator ','",
            "set logscale xy",
            "set key autotitle columnhead",
            f"set title '{report.experiment}'{fitted}",
            "set xlabel 'param'",
            "set ylabel 'error'",
            "plot 'report.csv' using 1:2:3 with yerrorbars, '' using 1:2 with lines notitle",
            "",
        ])
        path.write_text(script)
        return path


def dump_batch_csv(path: Union[str, Path], **columns: np.ndarray) -> Path:
    """Write equal-length arrays as CSV columns (increment batches, coupled pairs)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    if len({a.shape[0] for a in arrays}) > 1:
        raise ValidationError("all columns must have the same length")
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(names)
        for values in zip(*arrays):
            writer.writerow([_cell(v) for v in values])
    return path
