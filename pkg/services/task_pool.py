"""
Deterministic worker pool

Tasks are independent units of simulation (a chunk of paths at one grid
point). Each task draws from its own stream keyed by (seed, label, task
index) and results are returned in task order, so the output does not depend
on the number of threads.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np
from loguru import logger

from core.exceptions import ValidationError
from processing.rng import task_rng

T = TypeVar('T')
R = TypeVar('R')


def split_paths(total: int, chunk: int) -> List[int]:
    """Chunk sizes covering ``total`` paths; only the last chunk may be short"""
    if total < 1 or chunk < 1:
        raise ValidationError(f"total and chunk must be >= 1, got {total}, {chunk}")
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


class TaskPool:
    """Thread pool with per-task random streams and ordered reduction"""

    def __init__(self, seed: int, threads: int = 1):
        if threads < 1:
            raise ValidationError(f"threads must be >= 1, got {threads}")
        self.seed = seed
        self.threads = threads

    def map(self, label: str, fn: Callable[[T, np.random.Generator], R], tasks: Sequence[T]) -> List[R]:
        """Apply ``fn(task, rng)`` to every task; results keep task order"""
        tasks = list(tasks)
        logger.debug(f"{label}: {len(tasks)} tasks on {self.threads} thread(s)")

        def run(index: int) -> R:
            return fn(tasks[index], task_rng(self.seed, label, index))

        if self.threads == 1 or len(tasks) <= 1:
            return [run(i) for i in range(len(tasks))]
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(run, range(len(tasks))))
