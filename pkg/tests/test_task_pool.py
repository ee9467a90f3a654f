"""
Tests for the deterministic worker pool and random streams
"""
import numpy as np
import pytest

from core.exceptions import ValidationError
from processing.rng import stream, stream_key, task_rng
from services.task_pool import TaskPool, split_paths


class TestSplitPaths:

    @pytest.mark.parametrize("total,chunk,expected", [
        (2500, 1000, [1000, 1000, 500]),
        (1000, 1000, [1000]),
        (3, 10, [3]),
    ])
    def test_chunks(self, total, chunk, expected):
        assert split_paths(total, chunk) == expected

    def test_invalid(self):
        with pytest.raises(ValidationError):
            split_paths(0, 10)


class TestTaskPool:
    """Results must not depend on the number of threads"""

    @staticmethod
    def draw(task, rng):
        return task + rng.standard_normal(3)

    def test_results_keep_task_order(self):
        results = TaskPool(seed=1, threads=4).map('order', lambda task, rng: task, range(20))
        assert results == list(range(20))

    def test_thread_count_does_not_change_results(self):
        single = TaskPool(seed=42, threads=1).map('draws', self.draw, range(16))
        threaded = TaskPool(seed=42, threads=4).map('draws', self.draw, range(16))
        np.testing.assert_array_equal(np.stack(single), np.stack(threaded))

    def test_labels_give_independent_streams(self):
        pool = TaskPool(seed=42)
        first = pool.map('a', self.draw, [0])[0]
        second = pool.map('b', self.draw, [0])[0]
        assert not np.array_equal(first, second)

    def test_invalid_thread_count(self):
        with pytest.raises(ValidationError):
            TaskPool(seed=1, threads=0)


class TestStreams:

    def test_same_key_same_stream(self):
        np.testing.assert_array_equal(stream(9, 'x', 2).random(5), task_rng(9, 'x', 2).random(5))

    def test_task_index_changes_stream(self):
        assert not np.array_equal(task_rng(9, 'x', 0).random(5), task_rng(9, 'x', 1).random(5))

    def test_stream_key_is_stable(self):
        assert stream_key('coupling-gap') == stream_key('coupling-gap')
        assert stream_key(2 ** 40 + 3) == 3
