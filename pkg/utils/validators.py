"""
Validation of experiment parameters
"""
from typing import Sequence

import numpy as np

from core.exceptions import ConfigurationError

MIN_STATISTICAL_PATHS = 1000


def validate_grid(name: str, values: Sequence[float]) -> bool:
    """A grid must be nonempty and strictly monotone (either direction)"""
    grid = np.asarray(values, dtype=float)
    if grid.size == 0:
        raise ConfigurationError(f"grid '{name}' is empty")
    if grid.size > 1:
        steps = np.diff(grid)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ConfigurationError(f"grid '{name}' is not strictly monotone: {list(values)}")
    return True


def validate_statistical_size(paths: int, minimum: int = MIN_STATISTICAL_PATHS, key: str = 'paths') -> bool:
    """Statistical assertions need at least ``minimum`` paths per grid point"""
    if paths < minimum:
        raise ConfigurationError(
            f"{key} = {paths} per grid point is below {minimum}; "
            "set assertions = false to run without pass/fail checks")
    return True
