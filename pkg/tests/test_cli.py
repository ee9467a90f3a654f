"""
Tests for the levysim command line
"""
import pytest
from click.testing import CliRunner
from loguru import logger

import main
from config.settings import Config
from experiments.coupling_gap.plugin import CouplingGapExperiment
from processing.statistics import RateFit
from services.report_service import CheckResult, RateReport, ReportRow, SlopeCheck

SMALL_CONFIG = """
[logging]
file =

[coupling-gap]
bootstrap = 0
"""


@pytest.fixture(autouse=True)
def reset_logger():
    """The CLI points loguru at the runner's stderr; drop that sink afterwards"""
    yield
    logger.remove()


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv('LEVYSIM_CONFIG', raising=False)
    monkeypatch.delenv('LEVYSIM_THREADS', raising=False)
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'levysim.ini'
    path.write_text(SMALL_CONFIG)
    return str(path)


def failing_report():
    fit = RateFit(-1.0, 0.0, 0.0, 0.0, 5)
    return RateReport(
        experiment='coupling-gap',
        rows=[ReportRow(0.1, 1.0, 0.0, 1.0)],
        fitted_slope=-1.0,
        slope_ci=0.0,
        checks=[CheckResult('gap eps0=0.1', False, 1.0, 0.5)],
        slopes=[SlopeCheck('gap vs eps0', fit)],
    )


class TestCli:

    def test_list(self, runner, config_file):
        result = runner.invoke(main.cli, ['list', '--config', config_file])
        assert result.exit_code == main.EXIT_OK
        names = [line.split()[0] for line in result.output.splitlines()]
        assert names == ['brownian-approx', 'clt-check', 'clt-lower-bound', 'cost-audit', 'coupling-gap',
                         'euler-baseline', 'neglect-vs-gauss', 'scheme-rate']

    def test_version(self, runner):
        result = runner.invoke(main.cli, ['--version'])
        assert result.exit_code == 0
        assert '1.0.0' in result.output

    def test_small_run_writes_report(self, runner, config_file, tmp_path):
        out = tmp_path / 'out'
        result = runner.invoke(main.cli, ['coupling-gap', '--config', config_file, '--out', str(out),
                                          '--paths', '200', '--no-assertions', '--seed', '3'])
        assert result.exit_code == main.EXIT_OK, result.output
        assert 'coupling-gap: PASS' in result.output
        directory = out / 'coupling-gap'
        assert {p.name for p in directory.iterdir()} == {'report.csv', 'slopes.txt', 'plot.gp', 'levysim.ini'}
        assert (directory / 'report.csv').read_text().startswith('param,error,ci,cost,delta_eps')
        assert 'assertions disabled' in (directory / 'slopes.txt').read_text()

    def test_snapshot_reproduces_the_run(self, runner, config_file, tmp_path):
        out = tmp_path / 'out'
        result = runner.invoke(main.cli, ['coupling-gap', '--config', config_file, '--out', str(out),
                                          '--paths', '200', '--no-assertions', '--seed', '3'])
        assert result.exit_code == main.EXIT_OK, result.output
        snapshot = Config(str(out / 'coupling-gap' / main.SNAPSHOT_NAME))
        assert snapshot.get_general_config()['seed'] == 3
        assert snapshot.get_general_config()['out'] == str(out)
        params = snapshot.get_experiment_config('coupling-gap', CouplingGapExperiment().schema)
        assert params['paths'] == 200
        assert params['assertions'] is False
        assert params['bootstrap'] == 0

    def test_list_reports_plugins_that_fail_to_load(self, runner, config_file, tmp_path, monkeypatch):
        plugins = tmp_path / 'plugins'
        (plugins / 'broken').mkdir(parents=True)
        (plugins / 'broken' / 'plugin.py').write_text("raise RuntimeError('boom')\n")
        monkeypatch.setattr(main, 'EXPERIMENTS_DIR', plugins)
        result = runner.invoke(main.cli, ['list', '--config', config_file])
        assert result.exit_code == main.EXIT_ERROR
        assert 'broken: failed to load' in result.output

    def test_failed_assertion_exit_code(self, runner, config_file, mocker):
        run = mocker.patch('main.run_experiment', return_value=failing_report())
        result = runner.invoke(main.cli, ['coupling-gap', '--config', config_file])
        assert result.exit_code == main.EXIT_ASSERTION_FAILED
        assert 'coupling-gap: FAIL' in result.output
        run.assert_called_once()
        assert run.call_args.args[2] == 'coupling-gap'

    def test_overrides_are_passed_through(self, runner, config_file, mocker):
        run = mocker.patch('main.run_experiment', return_value=failing_report())
        runner.invoke(main.cli, ['coupling-gap', '--config', config_file, '--seed', '11', '--threads', '3'])
        overrides = run.call_args.args[3]
        assert overrides['seed'] == 11
        assert overrides['threads'] == 3
        assert overrides['no_assertions'] is False

    def test_threads_from_environment(self, runner, config_file, mocker):
        run = mocker.patch('main.run_experiment', return_value=failing_report())
        runner.invoke(main.cli, ['coupling-gap', '--config', config_file], env={'LEVYSIM_THREADS': '2'})
        assert run.call_args.args[3]['threads'] == 2

    def test_missing_config(self, runner, tmp_path):
        result = runner.invoke(main.cli, ['coupling-gap', '--config', str(tmp_path / 'absent.ini')])
        assert result.exit_code == main.EXIT_ERROR

    def test_unknown_experiment(self, runner, config_file):
        result = runner.invoke(main.cli, ['coupling-gapp', '--config', config_file])
        assert result.exit_code == main.EXIT_ERROR

    def test_unknown_section(self, runner, tmp_path):
        path = tmp_path / 'typo.ini'
        path.write_text(SMALL_CONFIG + "\n[coupling-gapp]\npaths = 10\n")
        result = runner.invoke(main.cli, ['coupling-gap', '--config', str(path)])
        assert result.exit_code == main.EXIT_ERROR

    def test_thread_count_does_not_change_the_report(self, runner, config_file, tmp_path):
        reports = []
        for threads in ('1', '4'):
            out = tmp_path / f'threads-{threads}'
            result = runner.invoke(main.cli, ['coupling-gap', '--config', config_file, '--out', str(out),
                                              '--paths', '300', '--no-assertions', '--threads', threads])
            assert result.exit_code == main.EXIT_OK, result.output
            reports.append((out / 'coupling-gap' / 'report.csv').read_bytes())
        assert reports[0] == reports[1]
