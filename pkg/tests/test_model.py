import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cachegeo.model import (
    CachingPolicy,
    ContentLibrary,
    NetworkParams,
    uniform_rates,
    validate_policy,
    zipf_popularity,
)


class TestZipfPopularity:
    def test_gamma_zero_is_uniform(self):
        np.testing.assert_allclose(zipf_popularity(4, 0.0), [0.25] * 4)

    def test_hand_evaluated_f3(self):
        # denominator 1 + 1/2 + 1/3 = 11/6
        np.testing.assert_allclose(
            zipf_popularity(3, 1.0), [6 / 11, 3 / 11, 2 / 11], rtol=1e-14
        )

    def test_f10_leading_mass(self):
        # H_10 = 7381/2520
        f = zipf_popularity(10, 1.0)
        np.testing.assert_allclose(f[0], 2520 / 7381, rtol=1e-14)
        assert f[0] == pytest.approx(0.3414, abs=5e-5)

    def test_rejects_empty_library(self):
        with pytest.raises(ValueError):
            zipf_popularity(0, 1.0)

    @given(
        count=st.integers(min_value=1, max_value=2000),
        gamma=st.floats(min_value=0.0, max_value=5.0, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_normalized_and_nonincreasing(self, count, gamma):
        f = zipf_popularity(count, gamma)
        assert abs(f.sum() - 1.0) < 1e-12
        assert np.all(np.diff(f) <= 1e-18)
        assert np.all(f > 0)

    def test_large_library_normalization(self):
        f = zipf_popularity(10**6, 5.0)
        assert abs(f.sum() - 1.0) < 1e-12


class TestUniformRates:
    def test_deterministic_given_seed(self):
        a = uniform_rates(1.0, 10, seed=123)
        b = uniform_rates(1.0, 10, seed=123)
        np.testing.assert_array_equal(a, b)

    def test_law_of_large_numbers(self):
        rho = uniform_rates(1.0, 10**5, seed=7)
        assert abs(rho.mean() - 0.5) < 0.01

    def test_support_is_half_open_above_zero(self):
        rho = uniform_rates(0.001, 5, seed=99)
        assert np.all(rho > 0)
        assert np.all(rho <= 0.001)

    def test_rejects_nonpositive_bound(self):
        with pytest.raises(ValueError):
            uniform_rates(0.0, 5, seed=1)


class TestValidatePolicy:
    def test_memory_must_be_below_library_size(self):
        policy = CachingPolicy(probs=np.ones(3), memory=3)
        msg = validate_policy(policy)
        assert msg is not None and "M=3" in msg

    def test_budget_violation(self):
        policy = CachingPolicy(probs=np.array([0.5, 0.5, 0.5]), memory=1)
        msg = validate_policy(policy)
        assert msg is not None and "budget" in msg

    def test_feasible_policy_passes(self):
        policy = CachingPolicy(probs=np.array([0.6, 0.3, 0.1]), memory=1)
        assert validate_policy(policy) is None

    def test_negative_and_oversized_probabilities(self):
        assert validate_policy(CachingPolicy(np.array([-0.1, 0.5, 0.1]), 1)) is not None
        assert validate_policy(CachingPolicy(np.array([1.2, 0.5, 0.1]), 2)) is not None

    def test_budget_tolerance_accepts_bisection_output(self):
        policy = CachingPolicy(probs=np.array([0.5, 0.5 + 5e-10, 0.0]), memory=1)
        assert validate_policy(policy) is None

    @given(
        probs=st.lists(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
            min_size=2,
            max_size=12,
        ),
        memory=st.integers(min_value=1, max_value=11),
    )
    @settings(max_examples=80, deadline=None)
    def test_accepts_exactly_the_feasible_set(self, probs, memory):
        p = np.array(probs)
        policy = CachingPolicy(probs=p, memory=memory)
        feasible = memory < p.size and p.sum() <= memory + 1e-9
        assert (validate_policy(policy) is None) == feasible


class TestDomainTypes:
    def test_library_rejects_unsorted_popularity(self):
        with pytest.raises(ValueError):
            ContentLibrary(2, np.array([0.3, 0.7]), np.array([1.0, 1.0]))

    def test_library_rejects_unnormalized_popularity(self):
        with pytest.raises(ValueError):
            ContentLibrary(2, np.array([0.7, 0.2]), np.array([1.0, 1.0]))

    def test_library_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError):
            ContentLibrary(2, np.array([0.7, 0.3]), np.array([1.0, 0.0]))

    def test_params_require_supercritical_pathloss(self):
        with pytest.raises(ValueError):
            NetworkParams(0.05, 0.002, 1.0, 0.01, pathloss_exp=2.0)

    def test_params_require_half_fading(self):
        with pytest.raises(ValueError):
            NetworkParams(0.05, 0.002, 1.0, 0.01, 3.0, fading_desired=0.2)

    def test_snr_with_zero_noise_is_infinite(self):
        params = NetworkParams(0.05, 0.002, 1.0, 0.0, 3.0)
        assert params.snr == np.inf

    def test_types_are_immutable(self):
        lib = ContentLibrary(2, np.array([0.7, 0.3]), np.array([1.0, 1.0]))
        with pytest.raises(Exception):
            lib.count = 5
        with pytest.raises(ValueError):
            lib.popularity[0] = 0.5
