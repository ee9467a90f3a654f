"""
Euler recursion on the grid rho_n(t) = [nt]/n

    X_0 = x,  X_{(i+1)/n} = X_{i/n} + sigma(X_{i/n}) Delta_{i+1}

The recursion is generic over the increment stream: exact, jump-neglecting
or Gaussian-compensated increments all feed the same code path. Arrays of
increments may carry leading batch dimensions (one row per path).
"""
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Union

import numpy as np

from core.exceptions import GridMismatch, InsufficientIncrements, ValidationError


@dataclass(frozen=True)
class SigmaFn:
    """Coefficient function with its declared Lipschitz and sup bounds"""

    eval: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: float
    sup_bound: Optional[float] = None
    name: str = "sigma"

    def __call__(self, x):
        return self.eval(x)

    @property
    def is_constant(self) -> bool:
        return self.lipschitz_bound == 0.0


def constant_sigma(c: float = 1.0) -> SigmaFn:
    return SigmaFn(lambda x: np.full_like(np.asarray(x, dtype=float), c), 0.0, abs(c), "constant")


def clipped_sine(level: float = 0.8) -> SigmaFn:
    """x -> clip(sin x, -level, level): Lipschitz 1, bounded by level"""
    return SigmaFn(lambda x: np.clip(np.sin(x), -level, level), 1.0, level, "clipped-sine")


def rational_sigma(scale: float = 1.0) -> SigmaFn:
    """x -> scale / (1 + x^2): Lipschitz 3 sqrt(3) / 8 * scale, bounded by scale"""
    return SigmaFn(lambda x: scale / (1.0 + np.asarray(x, dtype=float) ** 2),
                   3.0 * math.sqrt(3.0) / 8.0 * abs(scale), abs(scale), "rational")


SIGMAS: Dict[str, Callable[..., SigmaFn]] = {
    'constant': constant_sigma,
    'clipped-sine': clipped_sine,
    'rational': rational_sigma,
}


def get_sigma(name: str, **kwargs) -> SigmaFn:
    try:
        return SIGMAS[name](**kwargs)
    except KeyError:
        raise ValidationError(f"unknown sigma '{name}', expected one of {sorted(SIGMAS)}")


def grid_steps(n: int, horizon: float) -> int:
    """Number of Euler steps up to rho_n(T), i.e. [nT]"""
    return int(math.floor(n * horizon))


def rho_n(n: int, t: float) -> float:
    """rho_n(t) = [nt] / n"""
    if t < 0:
        raise ValidationError(f"t must be nonnegative, got {t}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return math.floor(n * t) / n


@dataclass(frozen=True)
class PathGrid:
    """One trajectory on {i/n : 0 <= i <= [nT]}"""

    n: int
    horizon: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        expected = grid_steps(self.n, self.horizon) + 1
        if self.values.shape != (expected,):
            raise ValidationError(f"path must hold {expected} grid values, got {self.values.shape}")
        self.values.setflags(write=False)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) / self.n

    @property
    def final_time(self) -> float:
        return rho_n(self.n, self.horizon)

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write ``t,value`` rows, one per grid point"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['t', 'value'])
            for t, v in zip(self.times, self.values):
                writer.writerow([repr(float(t)), repr(float(v))])
        return path


def euler_recursion(x0: float, sigma: SigmaFn, increments: np.ndarray) -> np.ndarray:
    """Run the recursion along the last axis; returns states including X_0"""
    increments = np.asarray(increments, dtype=float)
    steps = increments.shape[-1]
    states = np.empty(increments.shape[:-1] + (steps + 1,))
    states[..., 0] = x0
    x = states[..., 0].copy()
    for i in range(steps):
        x = x + sigma(x) * increments[..., i]
        states[..., i + 1] = x
    return states


def simulate_path(x0: float, sigma: SigmaFn, increments: np.ndarray, n: int, horizon: float) -> PathGrid:
    """Euler path on [0, rho_n(T)] driven by the first [nT] increments"""
    steps = grid_steps(n, horizon)
    increments = np.asarray(increments, dtype=float)
    if increments.ndim != 1:
        raise ValidationError("simulate_path takes a one-dimensional increment array")
    if increments.shape[0] < steps:
        raise InsufficientIncrements(f"need {steps} increments, got {increments.shape[0]}")
    return PathGrid(n, horizon, euler_recursion(x0, sigma, increments[:steps]))


def sup_error(pa: PathGrid, pb: PathGrid) -> float:
    """max over grid indices of |pa - pb|; square it for the strong-error functional"""
    if pa.n != pb.n or pa.horizon != pb.horizon or pa.values.shape != pb.values.shape:
        raise GridMismatch(f"grids differ: (n={pa.n}, T={pa.horizon}) vs (n={pb.n}, T={pb.horizon})")
    return float(np.max(np.abs(pa.values - pb.values)))


class EulerStepper:
    """Vectorised Euler state for a batch of paths advanced one increment at a time"""

    def __init__(self, x0: float, sigma: SigmaFn, batch: int):
        self.sigma = sigma
        self.state = np.full(batch, float(x0))
        self.steps = 0

    def step(self, increment: np.ndarray) -> np.ndarray:
        self.state = self.state + self.sigma(self.state) * increment
        self.steps += 1
        return self.state


class RunningSupTracker:
    """Streaming sup_error over a batch of coupled path pairs"""

    def __init__(self, batch: int):
        self.sup = np.zeros(batch)

    def update(self, xa: np.ndarray, xb: np.ndarray) -> None:
        np.maximum(self.sup, np.abs(xa - xb), out=self.sup)

    @property
    def squared(self) -> np.ndarray:
        return self.sup ** 2
