"""
Deterministic random number streams

Every unit of parallel work draws from its own counter-based (Philox) stream
keyed by ``(master seed, stream label, task index)``. Identical keys give
identical streams regardless of which worker thread runs the task, so the
number of threads never changes any output.
"""
import zlib
from typing import Union

import numpy as np

__all__ = ["stream", "task_rng", "stream_key"]


def stream_key(label: Union[str, int]) -> int:
    """Stable 32-bit key for a stream label (``hash()`` is salted per process)"""
    if isinstance(label, int):
        return label & 0xFFFFFFFF
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, *keys: Union[str, int]) -> np.random.Generator:
    """Return a Philox generator for the given master seed and key path"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [stream_key(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def task_rng(seed: int, label: str, task_index: int) -> np.random.Generator:
    """Generator for task ``task_index`` of the work labelled ``label``"""
    return stream(seed, label, task_index)
