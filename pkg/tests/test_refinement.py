"""
Tests for shared-noise grid refinement
"""
import numpy as np
import pytest

from core.exceptions import NeedsFiniteSmallActivity, ValidationError
from processing.euler_scheme import clipped_sine, constant_sigma
from processing.increment_gen import LevyTriplet
from processing.levy_measure import CompoundPoissonAtoms, TruncatedStableLike, TwoPointSymmetric
from processing.refinement import SchemeErrors, euler_refinement_errors, scheme_refinement_errors


class TestEulerRefinement:

    def test_constant_sigma_is_exact(self, rng):
        triplet = LevyTriplet(0.1, 0.5, TwoPointSymmetric(0.2))
        errors = euler_refinement_errors(triplet, constant_sigma(0.7), 0.0, [2, 4, 8], 1.0, 200, rng,
                                         ref_factor=4)
        for n in (2, 4, 8):
            assert errors[n].shape == (200,)
            assert np.max(errors[n]) <= 1e-20

    def test_grid_must_divide_the_reference(self, rng):
        triplet = LevyTriplet(0.0, 1.0, TwoPointSymmetric(0.2))
        with pytest.raises(ValidationError):
            euler_refinement_errors(triplet, clipped_sine(), 0.0, [16, 24], 1.0, 10, rng, ref_factor=1)

    def test_error_decreases_with_n(self):
        rng = np.random.default_rng(10)
        triplet = LevyTriplet(0.0, 0.5, TwoPointSymmetric(0.2))
        errors = euler_refinement_errors(triplet, clipped_sine(), 0.5, [4, 64], 1.0, 500, rng, ref_factor=4)
        assert errors[64].mean() < errors[4].mean()

    def test_infinite_activity_rejected(self, rng):
        triplet = LevyTriplet(0.0, 0.5, TruncatedStableLike(1.5))
        with pytest.raises(NeedsFiniteSmallActivity):
            euler_refinement_errors(triplet, clipped_sine(), 0.0, [4], 1.0, 10, rng, ref_factor=2)


class TestSchemeRefinement:

    def test_pure_diffusion_scheme_is_plain_euler(self, rng):
        triplet = LevyTriplet(0.0, 0.5, CompoundPoissonAtoms(()))
        result = scheme_refinement_errors(triplet, clipped_sine(), 0.3, 8, 0.125, 1.0, 100, rng, ref_factor=4)
        assert isinstance(result, SchemeErrors)
        np.testing.assert_allclose(result.scheme, result.euler, rtol=0, atol=1e-14)
        np.testing.assert_array_equal(result.cost, np.full(100, 8.0))
        assert result.reference_steps == 32

    def test_cost_counts_tail_jumps(self):
        rng = np.random.default_rng(6)
        triplet = LevyTriplet(0.0, 0.0, TwoPointSymmetric(0.2))
        result = scheme_refinement_errors(triplet, clipped_sine(), 0.0, 4, 0.1, 1.0, 2000, rng, ref_factor=2)
        # F_eps = 25 jumps per unit time above eps
        assert result.cost.mean() == pytest.approx(4 + 25, rel=0.03)

    def test_small_jumps_add_to_the_error(self):
        rng = np.random.default_rng(12)
        triplet = LevyTriplet(0.0, 0.0, TwoPointSymmetric(0.2))
        result = scheme_refinement_errors(triplet, clipped_sine(), 0.5, 4, 0.5, 1.0, 1000, rng, ref_factor=4)
        assert result.exact
        assert np.all(result.scheme >= 0.0)
        assert result.scheme.mean() > 0.0
        np.testing.assert_array_equal(result.cost, np.full(1000, 4.0))

    def test_inner_truncation_is_reported(self, rng):
        triplet = LevyTriplet(0.0, 0.0, TruncatedStableLike(1.5))
        result = scheme_refinement_errors(triplet, clipped_sine(), 0.0, 4, 0.25, 1.0, 50, rng, ref_factor=2,
                                          cdf_samples=500, inner_truncation=2.0)
        assert not result.exact
