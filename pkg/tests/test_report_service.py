"""
Tests for rate reports and their output files
"""
import math

import numpy as np
import pytest

from core.exceptions import ValidationError
from processing.statistics import RateFit, fit_log_slope
from services.report_service import (
    CheckResult,
    RateReport,
    ReportRow,
    ReportService,
    SlopeCheck,
    dump_batch_csv,
)

N_GRID = [16, 32, 64, 128, 256]


def make_report(assertions=True, passed_check=True, slope_kind='band', exact=True):
    errors = [1.0 / n for n in N_GRID]
    fit = fit_log_slope(N_GRID, errors)
    rows = [ReportRow(n, e, 0.1 * e, n + 0.5, {'eps': 1.0 / n}) for n, e in zip(N_GRID, errors)]
    rows[0].extra['exact'] = True
    return RateReport(
        experiment='toy',
        rows=rows,
        fitted_slope=fit.slope,
        slope_ci=fit.slope_ci,
        checks=[CheckResult('bound', passed_check, 0.5, 1.0, 'c = 5')],
        slopes=[SlopeCheck('error vs n', fit, slope_kind, -1.0, 0.3)],
        notes=['toy run'],
        exact=exact,
        assertions=assertions,
    )


class TestSlopeCheck:

    @staticmethod
    def fit(slope):
        return RateFit(slope, 0.0, 0.01, 0.02, 5)

    @pytest.mark.parametrize("kind,slope,target,passed", [
        ('band', -1.1, -1.0, True),
        ('band', -1.5, -1.0, False),
        ('ceiling', -0.7, -0.65, True),
        ('ceiling', -0.5, -0.65, False),
        ('floor', 0.8, 0.75, True),
        ('floor', 0.7, 0.75, False),
        ('info', 3.0, None, True),
    ])
    def test_kinds(self, kind, slope, target, passed):
        assert SlopeCheck('s', self.fit(slope), kind, target, 0.3).passed is passed

    def test_degenerate_fit(self):
        fit = RateFit(math.nan, math.nan, math.nan, math.nan, 5)
        assert not SlopeCheck('s', fit, 'floor', 0.75).passed
        assert SlopeCheck('s', fit).passed


class TestRateReport:

    def test_passed_and_failures(self):
        report = make_report(passed_check=False)
        assert not report.passed
        assert report.failures == ['bound']

    def test_assertions_off_always_pass(self):
        assert make_report(assertions=False, passed_check=False).passed

    def test_to_dict(self):
        data = make_report().to_dict()
        assert data['experiment'] == 'toy'
        assert data['passed'] is True
        assert len(data['rows']) == 5
        assert data['rows'][0]['extra']['eps'] == 1.0 / 16


class TestReportService:

    @pytest.fixture
    def service(self, tmp_path):
        return ReportService(tmp_path / 'results')

    def test_writes_all_files(self, service):
        directory = service.write(make_report())
        assert directory.name == 'toy'
        assert {p.name for p in directory.iterdir()} == {'report.csv', 'slopes.txt', 'plot.gp'}

    def test_csv_columns(self, service):
        directory = service.write(make_report())
        lines = (directory / 'report.csv').read_text().splitlines()
        assert lines[0] == 'param,error,ci,cost,eps,exact'
        assert lines[1].endswith(',true')
        assert lines[2].endswith(',')
        assert len(lines) == 6

    def test_slopes_text(self, service):
        text = (service.write(make_report()) / 'slopes.txt').read_text()
        assert '# toy run' in text
        assert 'error vs n: slope = -1.0000' in text
        assert '[target -1 +/- 0.3] PASS' in text
        assert 'check bound: observed 0.5 vs 1 (c = 5) PASS' in text
        assert text.rstrip().endswith('overall: PASS')

    def test_slopes_text_failure(self, service):
        text = (service.write(make_report(passed_check=False)) / 'slopes.txt').read_text()
        assert text.rstrip().endswith('overall: FAIL')

    def test_slopes_text_assertions_disabled(self, service):
        text = (service.write(make_report(assertions=False, passed_check=False)) / 'slopes.txt').read_text()
        assert 'assertions disabled' in text
        assert text.rstrip().endswith('overall: PASS')

    def test_approximation_note(self, service):
        text = (service.write(make_report(exact=False)) / 'slopes.txt').read_text()
        assert 'inner truncation' in text

    def test_plot_script(self, service):
        script = (service.write(make_report()) / 'plot.gp').read_text()
        assert "set logscale xy" in script
        assert "fitted slope -1.0000" in script
        assert "'report.csv'" in script


class TestDumpBatchCsv:

    def test_columns(self, tmp_path):
        path = dump_batch_csv(tmp_path / 'dump' / 'batch.csv', exact=np.array([0.5, 1.0]),
                              approx=np.array([0.25, 1.0]))
        assert path.read_text().splitlines() == ['exact,approx', '0.5,0.25', '1.0,1.0']

    def test_length_mismatch(self, tmp_path):
        with pytest.raises(ValidationError):
            dump_batch_csv(tmp_path / 'bad.csv', a=np.zeros(2), b=np.zeros(3))
