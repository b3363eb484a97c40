"""Catalog construction, Zipf profile, and demand sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cachebandit.catalog import build_catalog, sample_demands, zipf_profile

DEFAULT_CLASSES = [(1, 200), (3, 200), (5, 200), (7, 200), (9, 200)]


class TestBuildCatalog:
    def test_default_catalog(self):
        cat = build_catalog(DEFAULT_CLASSES)
        assert cat.num_files == 1000
        assert cat.total_size == 5000
        assert cat.size_classes == (9, 7, 5, 3, 1)
        # the canonical 256-unit cache holds 5.12% of this content
        assert 256 / cat.total_size == pytest.approx(0.0512)

    def test_single_file(self):
        cat = build_catalog([(4, 1)])
        assert cat.num_files == 1
        assert cat.total_size == 4
        assert cat.files == ((0, 4),)

    def test_hand_sum(self):
        cat = build_catalog([(2, 3), (1, 2)])
        assert cat.num_files == 5
        assert cat.total_size == 8
        assert cat.size_classes == (2, 1)

    def test_round_robin_mixes_sizes_across_ranks(self):
        cat = build_catalog(DEFAULT_CLASSES)
        assert cat.sizes[:5].tolist() == [9, 7, 5, 3, 1]
        # every decile carries every size class
        for lo in range(0, 1000, 100):
            assert set(cat.sizes[lo : lo + 100].tolist()) == {1, 3, 5, 7, 9}

    def test_round_robin_uneven_counts(self):
        cat = build_catalog([(2, 3), (1, 2)])
        assert cat.sizes.tolist() == [2, 1, 2, 1, 2]

    def test_random_assignment_preserves_multiset_and_is_seeded(self):
        a = build_catalog(DEFAULT_CLASSES, size_assignment="random", seed=3)
        b = build_catalog(DEFAULT_CLASSES, size_assignment="random", seed=3)
        c = build_catalog(DEFAULT_CLASSES, size_assignment="random", seed=4)
        assert np.array_equal(a.sizes, b.sizes)
        assert not np.array_equal(a.sizes, c.sizes)
        assert sorted(a.sizes.tolist()) == sorted(build_catalog(DEFAULT_CLASSES).sizes.tolist())

    def test_shuffled_ids_are_a_permutation(self):
        cat = build_catalog(DEFAULT_CLASSES, shuffle_ids=True, seed=11)
        assert sorted(cat.ids.tolist()) == list(range(1000))
        assert not np.array_equal(cat.ids, np.arange(1000))

    def test_identity_ids_by_default(self):
        cat = build_catalog(DEFAULT_CLASSES)
        assert np.array_equal(cat.ids, np.arange(1000))

    @pytest.mark.parametrize(
        "classes",
        [[], [(3, 2), (3, 1)], [(0, 5)], [(-1, 5)], [(2, 0)]],
    )
    def test_invalid_classes_rejected(self, classes):
        with pytest.raises(ValueError):
            build_catalog(classes)

    def test_randomization_requires_seed(self):
        with pytest.raises(ValueError):
            build_catalog(DEFAULT_CLASSES, size_assignment="random")
        with pytest.raises(ValueError):
            build_catalog(DEFAULT_CLASSES, shuffle_ids=True)


class TestZipfProfile:
    def test_uniform_when_flat(self):
        prof = zipf_profile(4, 0.0, 100)
        np.testing.assert_allclose(prof.theta, [25.0, 25.0, 25.0, 25.0])

    def test_hand_evaluated_harmonic_case(self):
        # H = 1 + 1/2 + 1/3 + 1/4 = 25/12, so theta_1 = 100 * 12/25 = 48
        prof = zipf_profile(4, 1.0, 100)
        np.testing.assert_allclose(prof.theta, [48.0, 24.0, 16.0, 12.0], rtol=1e-12)

    def test_canonical_profile_against_independent_series(self):
        prof = zipf_profile(1000, 0.56, 100)
        normalizer = math.fsum(1.0 / i**0.56 for i in range(1, 1001))
        assert prof.theta[0] == pytest.approx(100.0 / normalizer, rel=1e-12)
        assert prof.theta[432] == pytest.approx(100.0 / (433**0.56 * normalizer), rel=1e-12)

    def test_normalization_and_monotonicity(self):
        prof = zipf_profile(1000, 0.56, 100)
        assert abs(prof.theta.sum() - 100.0) <= 1e-9 * 100.0
        assert abs(prof.probs.sum() - 1.0) <= 1e-12
        assert np.all(np.diff(prof.theta) < 0)

    @given(
        num_files=st.integers(1, 300),
        gamma=st.floats(0.0, 3.0),
        users=st.integers(1, 500),
    )
    @settings(max_examples=50, deadline=None)
    def test_profile_invariants_hold_generally(self, num_files, gamma, users):
        prof = zipf_profile(num_files, gamma, users)
        assert abs(prof.theta.sum() - users) <= 1e-9 * users
        assert np.all(np.diff(prof.theta) <= 0)
        assert prof.theta[0] <= users * (1 + 1e-12)
        assert prof.theta[-1] > 0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            zipf_profile(0, 0.5, 10)
        with pytest.raises(ValueError):
            zipf_profile(5, -0.1, 10)
        with pytest.raises(ValueError):
            zipf_profile(5, 0.5, 0)


class TestSampleDemands:
    def test_single_file_gets_all_requests(self):
        prof = zipf_profile(1, 1.3, 7)
        counts = sample_demands(prof, np.random.default_rng(0))
        assert counts.tolist() == [7]

    def test_counts_sum_to_users_with_bounded_support(self):
        prof = zipf_profile(50, 0.8, 100)
        rng = np.random.default_rng(1)
        for _ in range(20):
            d = sample_demands(prof, rng)
            assert d.sum() == 100
            assert d.min() >= 0 and d.max() <= 100

    def test_binomial_concentration_two_files(self):
        # with two equally popular files and 10^4 users, the first file's
        # count is Binomial(10^4, 1/2): |d - 5000| <= 3*sqrt(U/4) should
        # hold in at least 99% of seeds
        prof = zipf_profile(2, 0.0, 10_000)
        bound = 3 * math.sqrt(10_000 * 0.25)
        hits = 0
        for seed in range(1000):
            d = sample_demands(prof, np.random.default_rng(seed))
            hits += abs(d[0] - 5000) <= bound
        assert hits >= 990

    def test_seed_determinism(self):
        prof = zipf_profile(100, 0.56, 100)
        a = [sample_demands(prof, np.random.default_rng(42)) for _ in range(1)][0]
        b = sample_demands(prof, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_mean_convergence_to_theta(self):
        # empirical means over 10^4 periods track theta within
        # 5*sqrt(theta/R + 1/R) for every file
        prof = zipf_profile(1000, 0.56, 100)
        rng = np.random.default_rng(7)
        reps = 10_000
        total = np.zeros(1000)
        for _ in range(reps):
            total += sample_demands(prof, rng)
        mean = total / reps
        tol = 5.0 * np.sqrt(prof.theta / reps + 1.0 / reps)
        assert np.all(np.abs(mean - prof.theta) <= tol)
