"""
Experiment manager for levysim
"""
import importlib.util
import inspect
import sys
from pathlib import Path
from typing import Any, Dict, List, Type

from loguru import logger

from .base_experiment import BaseExperiment
from .exceptions import ExperimentLoadError, ExperimentNotFoundError


class ExperimentManager:
    """Discovers, loads and instantiates experiment plugins"""

    def __init__(self, experiments_directory: str, config: Any = None):
        self.experiments_directory = Path(experiments_directory)
        self.config = config

        self._experiment_classes: Dict[str, Type[BaseExperiment]] = {}
        self._failed: List[str] = []

    def discover_experiments(self) -> List[str]:
        """
        Discover experiment packages in the experiments directory

        Returns:
            List of directory names holding a plugin.py
        """
        discovered = []

        if not self.experiments_directory.exists():
            logger.warning(f"Experiments directory not found: {self.experiments_directory}")
            return discovered

        for experiment_dir in sorted(self.experiments_directory.iterdir()):
            if experiment_dir.is_dir() and not experiment_dir.name.startswith('_'):
                if (experiment_dir / 'plugin.py').exists():
                    discovered.append(experiment_dir.name)
                    logger.debug(f"Discovered experiment: {experiment_dir.name}")

        return discovered

    def load_experiment(self, directory_name: str) -> Type[BaseExperiment]:
        """
        Import ``<directory>/plugin.py`` and register its experiment class

        Raises:
            ExperimentNotFoundError: if the plugin file is missing
            ExperimentLoadError: if importing fails or no experiment class is defined
        """
        plugin_path = self.experiments_directory / directory_name / 'plugin.py'
        if not plugin_path.exists():
            raise ExperimentNotFoundError(f"Experiment file not found: {plugin_path}")

        module_name = f"experiments.{directory_name}.plugin"
        try:
            spec = importlib.util.spec_from_file_location(module_name, plugin_path)
            module = importlib.util.module_from_spec(spec)
            sys.modules[module_name] = module
            spec.loader.exec_module(module)
        except Exception as e:
            self._failed.append(directory_name)
            raise ExperimentLoadError(f"Failed to import experiment {directory_name}: {e}") from e

        experiment_class = None
        for _, attr in inspect.getmembers(module, inspect.isclass):
            if (issubclass(attr, BaseExperiment) and attr is not BaseExperiment
                    and not inspect.isabstract(attr) and attr.__module__ == module_name):
                experiment_class = attr
                break

        if experiment_class is None:
            self._failed.append(directory_name)
            raise ExperimentLoadError(f"No valid experiment class found in {directory_name}")

        self._experiment_classes[experiment_class.name] = experiment_class
        logger.debug(f"Loaded experiment class: {experiment_class.name}")
        return experiment_class

    def load_all_experiments(self) -> Dict[str, bool]:
        """
        Discover and load all available experiments

        Returns:
            Dictionary mapping directory names to load success status
        """
        results = {}
        for directory_name in self.discover_experiments():
            try:
                self.load_experiment(directory_name)
                results[directory_name] = True
            except (ExperimentLoadError, ExperimentNotFoundError) as e:
                logger.error(str(e))
                results[directory_name] = False
        return results

    @property
    def names(self) -> List[str]:
        return sorted(self._experiment_classes)

    def get_experiment(self, name: str) -> BaseExperiment:
        """Instantiate an experiment by name, attaching its validated configuration"""
        if not self._experiment_classes:
            self.load_all_experiments()
        experiment_class = self._experiment_classes.get(name)
        if experiment_class is None:
            raise ExperimentNotFoundError(
                f"Unknown experiment '{name}'; available: {', '.join(self.names) or 'none'}")
        experiment = experiment_class()
        if self.config is not None and hasattr(self.config, 'get_experiment_config'):
            experiment.config = self.config.get_experiment_config(name, experiment.schema)
        return experiment

    def get_status(self) -> Dict[str, Any]:
        """Get status of all experiments"""
        return {
            'total_loaded': len(self._experiment_classes),
            'failed': list(self._failed),
            'experiments': {name: cls().describe() for name, cls in sorted(self._experiment_classes.items())},
        }
