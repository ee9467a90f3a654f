#!/usr/bin/env python3

"""
Command-line entry point: ``levysim <experiment> [options]``

Exit code 0 when every assertion passes, 2 when an assertion fails and 1 on
configuration or simulation errors.
"""

import sys
from typing import Any, Dict, List, Optional

import click
from dotenv import load_dotenv
from loguru import logger

from config.settings import Config
from core.base_experiment import ExperimentContext
from core.exceptions import ConfigurationError, LevySimError
from core.experiment_manager import ExperimentManager
from experiments import EXPERIMENTS_DIR
from services.report_service import RateReport, ReportService
from utils.helpers import verdict
from utils.logger import setup_logging

__version__ = "1.0.0"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ASSERTION_FAILED = 2

SNAPSHOT_NAME = 'levysim.ini'


def build_manager(config: Config) -> ExperimentManager:
    """Load every experiment plugin and reject config sections that match none of them"""
    manager = ExperimentManager(str(EXPERIMENTS_DIR), config)
    results = manager.load_all_experiments()
    failed = [name for name, ok in results.items() if not ok]
    if failed:
        raise LevySimError(f"Failed to load experiments: {', '.join(failed)}")
    config.check_sections(manager.names)
    return manager


def apply_overrides(config: Config, name: str, overrides: Dict[str, Any]):
    """Write CLI overrides into the configuration so the saved snapshot reproduces the run"""
    for key in ('seed', 'threads', 'out'):
        if overrides.get(key) is not None:
            config.set('general', key, overrides[key])
    if overrides.get('paths') is not None:
        config.set(name, 'paths', overrides['paths'])
    if overrides.get('no_assertions'):
        config.set(name, 'assertions', False)


def run_experiment(manager: ExperimentManager, config: Config, name: str,
                   overrides: Dict[str, Any]) -> RateReport:
    """Run one experiment with CLI overrides applied; write its report and a config snapshot"""
    apply_overrides(config, name, overrides)
    general = config.get_general_config()
    experiment = manager.get_experiment(name)
    context = ExperimentContext(
        seed=general['seed'],
        threads=general['threads'],
        out=general['out'],
        params=dict(experiment.config),
    )
    report = experiment.run(context)
    ReportService(context.out).write(report)
    config.save_config(str(context.out / name / SNAPSHOT_NAME))
    return report


def run(names: List[str], config_path: Optional[str], overrides: Dict[str, Any],
        log_level: Optional[str]) -> int:
    try:
        config = Config(config_path)
        logging_config = config.get_logging_config()
        setup_logging(log_level or logging_config.get('level', 'INFO'), logging_config.get('file'))
        manager = build_manager(config)
        if names == ['all']:
            names = manager.names
        exit_code = EXIT_OK
        for name in names:
            report = run_experiment(manager, config, name, overrides)
            click.echo(f"{name}: {verdict(report.passed)}")
            for failure in report.failures if report.assertions else []:
                logger.error(f"{name}: assertion failed: {failure}")
                click.echo(f"  failed: {failure}", err=True)
            if not report.passed:
                exit_code = EXIT_ASSERTION_FAILED
        return exit_code
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        click.echo(f"Configuration error: {e}", err=True)
        return EXIT_ERROR
    except LevySimError as e:
        logger.error(f"Experiment failed: {e}")
        click.echo(f"Error: {e}", err=True)
        return EXIT_ERROR


def list_experiments(config_path: Optional[str]) -> int:
    try:
        config = Config(config_path)
    except LevySimError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_ERROR
    setup_logging('WARNING')
    manager = ExperimentManager(str(EXPERIMENTS_DIR), config)
    manager.load_all_experiments()
    status = manager.get_status()
    for name, info in status['experiments'].items():
        click.echo(f"{name:<18} v{info['version']}  {info['description']}")
    for name in status['failed']:
        click.echo(f"{name}: failed to load", err=True)
    return EXIT_ERROR if status['failed'] else EXIT_OK


@click.command(context_settings={'help_option_names': ['-h', '--help']})
@click.argument('experiments', nargs=-1, required=True)
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), envvar='LEVYSIM_CONFIG',
              help='INI file read on top of the packaged defaults.')
@click.option('--seed', type=click.IntRange(min=0), help='Master seed (overrides [general] seed).')
@click.option('--out', type=click.Path(file_okay=False), help='Output directory for reports.')
@click.option('--threads', type=click.IntRange(min=1), envvar='LEVYSIM_THREADS',
              help='Worker threads (falls back to LEVYSIM_THREADS).')
@click.option('--paths', type=click.IntRange(min=1), help='Paths per grid point.')
@click.option('--no-assertions', is_flag=True, help='Report only; never fail on thresholds.')
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
@click.version_option(__version__, prog_name='levysim')
def cli(experiments, config_path, seed, out, threads, paths, no_assertions, log_level):
    """
    Run EXPERIMENTS (names as in ``levysim list``, or ``all``) and write
    report.csv, slopes.txt, plot.gp and a levysim.ini snapshot of the
    effective configuration under the output directory.
    """
    names = list(experiments)
    if names == ['list']:
        sys.exit(list_experiments(config_path))
    overrides = {'seed': seed, 'out': out, 'threads': threads, 'paths': paths, 'no_assertions': no_assertions}
    sys.exit(run(names, config_path, overrides, log_level))


def main():
    """Console-script entry point; .env is loaded before click reads LEVYSIM_* variables"""
    load_dotenv()
    cli()


if __name__ == '__main__':
    main()
