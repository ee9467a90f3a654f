"""
Shared fixtures for the levysim test suite
"""
import numpy as np
import pytest

from config.settings import Config
from core.base_experiment import ExperimentContext
from core.experiment_manager import ExperimentManager
from experiments import EXPERIMENTS_DIR


@pytest.fixture
def rng():
    """Fixed-seed generator; tests that need independent draws take their own"""
    return np.random.default_rng(12345)


@pytest.fixture
def make_config():
    """Packaged defaults with INI text laid on top"""
    def factory(text: str = "") -> Config:
        config = Config()
        config.read_string("[logging]\nfile =\n" + text)
        return config
    return factory


@pytest.fixture
def manager(make_config):
    """Experiment manager over the packaged plugins; call with INI overrides"""
    def factory(text: str = "") -> ExperimentManager:
        config = make_config(text)
        experiment_manager = ExperimentManager(str(EXPERIMENTS_DIR), config)
        experiment_manager.load_all_experiments()
        return experiment_manager
    return factory


@pytest.fixture
def run_experiment(manager, tmp_path):
    """Run one experiment end to end with small overrides; returns the RateReport"""
    def runner(name: str, text: str = "", seed: int = 7, threads: int = 1):
        experiment = manager(text).get_experiment(name)
        context = ExperimentContext(seed=seed, threads=threads, out=tmp_path / 'results',
                                    params=dict(experiment.config))
        return experiment.run(context)
    return runner
