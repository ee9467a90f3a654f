"""
Base experiment architecture for levysim
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
from loguru import logger

from core.exceptions import ConfigurationError
from processing.rng import stream
from services.task_pool import TaskPool
from utils.helpers import verdict
from utils.validators import validate_grid, validate_statistical_size


@dataclass
class ExperimentContext:
    """Run-wide settings shared by every experiment"""

    seed: int
    threads: int = 1
    out: Path = Path('results')
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.out = Path(self.out)
        self.pool = TaskPool(self.seed, self.threads)

    def param(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    @property
    def paths(self) -> int:
        return int(self.params['paths'])

    @property
    def horizon(self) -> float:
        return float(self.params['horizon'])

    @property
    def chunk(self) -> int:
        return int(self.params['chunk'])

    @property
    def bootstrap(self) -> int:
        return int(self.params['bootstrap'])

    @property
    def cdf_samples(self) -> int:
        return int(self.params['cdf_samples'])

    @property
    def assertions(self) -> bool:
        return bool(self.params.get('assertions', True))

    def rng(self, *keys) -> np.random.Generator:
        """Stream for work outside the task pool (CDF references, bootstraps)"""
        return stream(self.seed, *keys)


class BaseExperiment(ABC):
    """Base class for all experiments"""

    name: str = ""
    version: str = "1.0.0"
    description: str = ""
    # grid-valued parameters checked for being nonempty and strictly monotone
    grids: List[str] = []
    # path counts that feed statistical assertions
    sample_sizes: List[str] = ['paths']

    def __init__(self):
        self._config: Dict[str, Any] = {}

    @property
    def config(self) -> Dict[str, Any]:
        """Get experiment configuration"""
        return self._config

    @config.setter
    def config(self, value: Dict[str, Any]):
        """Set experiment configuration"""
        self._config = value

    @property
    @abstractmethod
    def schema(self) -> Dict[str, Any]:
        """Draft 7 JSON schema of the experiment's config section"""

    @abstractmethod
    def execute(self, context: ExperimentContext):
        """
        Run the experiment

        Args:
            context: seed, thread count, output directory and validated parameters

        Returns:
            RateReport with one row per grid point and the fitted slopes
        """

    def validate_config(self, config: Dict[str, Any]) -> bool:
        """
        Check semantic constraints the schema cannot express

        Raises:
            ConfigurationError: on a bad grid or too few paths for an assertion
        """
        for key in self.grids:
            if key in config:
                validate_grid(key, config[key])
        if config.get('assertions', True):
            for key in self.sample_sizes:
                if key == 'paths' or key in config:
                    validate_statistical_size(config.get(key, 0), key=key)
        return True

    def run(self, context: ExperimentContext):
        """Validate the context parameters, then execute"""
        if not self.validate_config(context.params):
            raise ConfigurationError(f"Invalid configuration for experiment {self.name}")
        logger.info(f"Running experiment {self.name} (seed={context.seed}, threads={context.threads})")
        report = self.execute(context)
        logger.info(f"Experiment {self.name} finished: {verdict(report.passed)}")
        return report

    def describe(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'version': self.version,
            'description': self.description,
        }

    def __str__(self):
        return f"{self.name} v{self.version}"

    def __repr__(self):
        return f"<{self.__class__.__name__}(name='{self.name}', version='{self.version}')>"
