"""
Tests for the increment generators
"""
import math

import numpy as np
import pytest

from core.exceptions import InfiniteActivity, NeedsFiniteSmallActivity, ValidationError
from processing import increment_gen
from processing.increment_gen import (
    IncrementBatch,
    IncrementKind,
    LevyTriplet,
    SmallJumpSum,
    feasible_inner_truncation,
    make_params,
    sample_compound_poisson,
    sample_exact,
    sample_gauss_compensated,
    sample_neglect,
    sample_tail_sums,
)
from processing.levy_measure import INF, CompoundPoissonAtoms, TruncatedStableLike, TwoPointSymmetric


def within_four_sigma_of_variance(values, target):
    """Sample variance against target using the empirical fourth moment for the standard error"""
    centred = values - values.mean()
    var = float(np.mean(centred ** 2))
    se = math.sqrt(max(float(np.mean(centred ** 4)) - var * var, 0.0) / values.size)
    return abs(var - target) <= 4.0 * se


class TestIncrementParams:
    """Derived coefficients a_{n,eps}, b_{n,eps} and the tail Poisson mean"""

    def test_symmetric_measure_keeps_drift(self):
        params = make_params(LevyTriplet(0.3, 0.5, TwoPointSymmetric(0.1)), 10, 0.05)
        assert params.a_n_eps == pytest.approx(0.03)
        assert params.poisson_mean == pytest.approx(10.0)
        assert params.m2_eps == 0.0
        assert params.b_n_eps == pytest.approx(0.5 / math.sqrt(10))

    def test_asymmetric_tail_is_compensated_in_the_drift(self):
        nu = CompoundPoissonAtoms(((1.0, 2.0), (-0.1, 1.0)))
        params = make_params(LevyTriplet(0.0, 0.0, nu), 4, 0.5)
        assert params.a_n_eps == pytest.approx(-2.0 / 4)
        assert params.b_n_eps == pytest.approx(math.sqrt(0.01 / 4))

    @pytest.mark.parametrize("n", [0, -3, 2.5])
    def test_invalid_n(self, n):
        with pytest.raises(ValidationError):
            make_params(LevyTriplet(0.0, 1.0, TwoPointSymmetric(0.1)), n, 0.1)

    def test_invalid_eps(self):
        with pytest.raises(ValidationError):
            make_params(LevyTriplet(0.0, 1.0, TwoPointSymmetric(0.1)), 4, 0.0)

    def test_eps_above_one_is_accepted(self):
        params = make_params(LevyTriplet(0.0, 1.0, TwoPointSymmetric(0.1)), 4, 2.0)
        assert params.m2_eps == pytest.approx(1.0)

    def test_negative_brownian_coefficient(self):
        with pytest.raises(ValidationError):
            LevyTriplet(0.0, -1.0, TwoPointSymmetric(0.1))


class TestGaussCompensated:
    """Increment law contract: mean a/n and variance (b^2 + m2) / n"""

    @pytest.mark.parametrize("eps", [0.05, 0.5])
    def test_mean_and_variance(self, eps):
        rng = np.random.default_rng(2024)
        triplet = LevyTriplet(0.4, 0.5, TwoPointSymmetric(0.1))
        n, count = 10, 100_000
        batch = sample_gauss_compensated(make_params(triplet, n, eps), count, rng)
        values = batch.values
        assert batch.kind is IncrementKind.GAUSS_COMPENSATED
        assert abs(values.mean() - triplet.a / n) <= 4.0 * values.std() / math.sqrt(count)
        assert within_four_sigma_of_variance(values, triplet.total_variance_rate / n)

    def test_no_tail_jumps_above_the_atom(self, rng):
        triplet = LevyTriplet(0.0, 0.5, TwoPointSymmetric(0.1))
        batch = sample_gauss_compensated(make_params(triplet, 100, 0.2), 1000, rng)
        assert np.all(batch.jump_counts == 0)
        assert batch.mean_cost == 1.0

    def test_cost_counts_tail_jumps(self, rng):
        triplet = LevyTriplet(0.0, 0.0, TwoPointSymmetric(0.1))
        batch = sample_gauss_compensated(make_params(triplet, 10, 0.05), 20000, rng)
        assert batch.jump_counts.mean() == pytest.approx(10.0, rel=0.02)
        assert batch.mean_cost == pytest.approx(11.0, rel=0.02)

    @pytest.mark.parametrize("sampler", [sample_gauss_compensated, sample_neglect])
    def test_same_seed_is_bit_identical(self, sampler):
        params = make_params(LevyTriplet(0.1, 0.5, TruncatedStableLike(1.2)), 8, 0.1)
        first = sampler(params, 2000, np.random.default_rng(42))
        second = sampler(params, 2000, np.random.default_rng(42))
        assert first.values.tobytes() == second.values.tobytes()
        np.testing.assert_array_equal(first.jump_counts, second.jump_counts)

    def test_count_must_be_positive(self, rng):
        params = make_params(LevyTriplet(0.0, 1.0, TwoPointSymmetric(0.1)), 4, 0.5)
        with pytest.raises(ValidationError):
            sample_gauss_compensated(params, 0, rng)


class TestNeglect:

    def test_variance_drops_the_small_jumps(self):
        rng = np.random.default_rng(99)
        triplet = LevyTriplet(0.0, 0.5, TwoPointSymmetric(0.1))
        batch = sample_neglect(make_params(triplet, 10, 0.5), 50_000, rng)
        assert batch.kind is IncrementKind.NEGLECT
        assert within_four_sigma_of_variance(batch.values, 0.25 / 10)

    def test_same_tail_as_gauss_compensated(self):
        triplet = LevyTriplet(0.0, 0.5, TwoPointSymmetric(0.1))
        params = make_params(triplet, 10, 0.05)
        neglect = sample_neglect(params, 100, np.random.default_rng(5))
        gauss = sample_gauss_compensated(params, 100, np.random.default_rng(5))
        np.testing.assert_array_equal(neglect.jump_counts, gauss.jump_counts)


class TestExact:

    def test_exact_increment_moments(self):
        rng = np.random.default_rng(7)
        triplet = LevyTriplet(0.2, 0.5, CompoundPoissonAtoms(((0.5, 1.0), (-0.5, 1.0), (1.0, 0.5))))
        n, count = 4, 100_000
        batch = sample_exact(triplet, n, count, rng)
        assert batch.kind is IncrementKind.EXACT
        assert abs(batch.values.mean() - triplet.a / n) <= 4.0 * batch.values.std() / math.sqrt(count)
        assert within_four_sigma_of_variance(batch.values, triplet.total_variance_rate / n)

    def test_same_seed_is_bit_identical(self):
        triplet = LevyTriplet(0.2, 0.5, CompoundPoissonAtoms(((0.5, 1.0), (-0.3, 2.0))))
        first = sample_exact(triplet, 4, 2000, np.random.default_rng(9))
        second = sample_exact(triplet, 4, 2000, np.random.default_rng(9))
        assert first.values.tobytes() == second.values.tobytes()
        np.testing.assert_array_equal(first.jump_counts, second.jump_counts)

    def test_infinite_activity_rejected(self, rng):
        with pytest.raises(InfiniteActivity):
            sample_exact(LevyTriplet(0.0, 1.0, TruncatedStableLike(1.5)), 4, 10, rng)


class TestSmallJumpSum:
    """Compensated small-jump sums"""

    def test_two_point_sum_lives_on_the_lattice(self, rng):
        small = SmallJumpSum(TwoPointSymmetric(0.1), 0.5, 0.25)
        assert small.exact
        assert small.lattice == (0.1, pytest.approx(50.0 * 0.25))
        values = small.sample(10000, rng)
        k = values / 0.1
        np.testing.assert_allclose(k, np.rint(k), atol=1e-9)
        assert small.variance == pytest.approx(0.25)

    def test_atom_sum_is_centred(self):
        rng = np.random.default_rng(11)
        nu = CompoundPoissonAtoms(((0.1, 30.0), (0.05, 10.0), (-0.08, 5.0)))
        small = SmallJumpSum(nu, 0.2, 0.5)
        values, counts = small.sample_with_counts(100_000, rng)
        assert abs(values.mean()) <= 4.0 * values.std() / math.sqrt(values.size)
        assert counts.mean() == pytest.approx(45.0 * 0.5, rel=0.02)
        assert within_four_sigma_of_variance(values, small.variance)

    def test_empty_band(self, rng):
        small = SmallJumpSum(TwoPointSymmetric(0.1), 0.05, 1.0)
        assert small.empty
        values, counts = small.sample_with_counts(10, rng)
        assert np.all(values == 0.0)
        assert np.all(counts == 0)

    def test_strict_mode_rejects_infinite_activity(self):
        with pytest.raises(NeedsFiniteSmallActivity):
            SmallJumpSum(TruncatedStableLike(1.5), 0.1, 0.1, strict=True)

    def test_inner_truncation_layer(self):
        rng = np.random.default_rng(3)
        small = SmallJumpSum(TruncatedStableLike(1.5), 0.1, 0.1, inner_truncation=4.0)
        assert not small.exact
        assert small.inner_eps == pytest.approx(0.025)
        values = small.sample(50_000, rng)
        assert within_four_sigma_of_variance(values, small.variance)

    def test_full_measure_increment(self, rng):
        small = SmallJumpSum(TwoPointSymmetric(0.2), INF, 1.0, strict=True)
        values, counts = small.sample_with_counts(5000, rng)
        assert counts.mean() == pytest.approx(25.0, rel=0.05)


class TestTailSums:

    def test_tail_sums_and_counts(self, rng):
        sums, counts = sample_tail_sums(TwoPointSymmetric(0.1), 0.05, 0.01, 5000, rng)
        assert sums.shape == counts.shape == (5000,)
        assert np.all(np.abs(sums) <= 0.1 * counts + 1e-12)

    def test_batch_shape_mismatch(self):
        with pytest.raises(ValidationError):
            IncrementBatch(IncrementKind.EXACT, np.zeros(3), np.zeros(2))

    def test_compound_poisson_in_blocks(self, monkeypatch):
        monkeypatch.setattr(increment_gen, 'MAX_JUMPS_PER_DRAW', 7)
        rng = np.random.default_rng(14)
        sums, counts = sample_compound_poisson(TwoPointSymmetric(0.1), 0.05, INF, 20.0, 5000, rng)
        k = np.rint(sums / 0.1).astype(np.int64)
        np.testing.assert_allclose(sums, 0.1 * k, atol=1e-9)
        assert np.all(np.abs(k) <= counts)
        assert np.all((k + counts) % 2 == 0)
        assert within_four_sigma_of_variance(sums, 20.0 * 0.01)


class TestFeasibleInnerTruncation:

    def test_finite_activity_keeps_the_target(self):
        assert feasible_inner_truncation(TwoPointSymmetric(0.1), 0.5, 1.0, 64.0, 1.0) == 64.0

    def test_cheap_band_keeps_the_target(self):
        assert feasible_inner_truncation(TruncatedStableLike(0.5), 1.0 / 16, 1.0 / 16, 64.0, 4096.0) == 64.0

    def test_budget_caps_the_band(self):
        nu, eps, dt = TruncatedStableLike(1.8), 1.0 / 16, 1.0 / 16
        k = feasible_inner_truncation(nu, eps, dt, 64.0, 512.0)
        assert 1.0 < k < 64.0
        assert nu.band_mass(eps / k, eps) * dt == pytest.approx(512.0, rel=1e-6)

    def test_target_must_exceed_one(self):
        with pytest.raises(ValidationError):
            feasible_inner_truncation(TruncatedStableLike(1.5), 0.1, 0.1, 1.0)
