"""Knapsack solver contracts: LP structure, greedy, B&B, brute force, bound."""

import itertools
import math

import numpy as np
import pytest

from cachebandit.catalog import build_catalog, zipf_profile
from cachebandit.spo import (
    SpoInstance,
    delta_bound,
    solve_bnb,
    solve_bruteforce,
    solve_greedy,
    solve_lp,
)

TOY = SpoInstance(np.array([3.0, 6.0, 5.0]), np.array([1, 3, 5]), 5)


def brute_optimum(inst):
    """Independent oracle: plain subset enumeration with fsum values."""
    best_val, best_set = 0.0, ()
    n = inst.num_items
    for r in range(n + 1):
        for subset in itertools.combinations(range(n), r):
            if sum(int(inst.weights[i]) for i in subset) <= inst.capacity:
                v = math.fsum(float(inst.values[i]) for i in subset)
                if v > best_val:
                    best_val, best_set = v, subset
    return best_val, best_set


def random_zipf_instance(rng, max_files=20):
    num_files = int(rng.integers(4, max_files + 1))
    sizes = rng.choice([1, 3, 5, 7, 9], size=num_files).astype(np.int64)
    gamma = float(rng.uniform(0.0, 2.4))
    ranks = np.arange(1, num_files + 1, dtype=np.float64)
    theta = 100.0 * ranks**-gamma / np.sum(ranks**-gamma)
    capacity = int(rng.integers(0, int(sizes.sum()) + 4))
    return SpoInstance(theta * sizes, sizes, capacity)


class TestSolveLp:
    def test_toy_instance(self):
        # densities (3, 2, 1): both cheap items fit, 1/5 of the last
        sol = solve_lp(TOY)
        np.testing.assert_allclose(sol.x, [1.0, 1.0, 0.2])
        assert sol.value == pytest.approx(10.0)
        assert sol.frac_index == 2
        assert sol.beta == pytest.approx(0.2)

    def test_zero_capacity(self):
        sol = solve_lp(SpoInstance(TOY.values, TOY.weights, 0))
        assert np.all(sol.x == 0) and sol.value == 0.0 and sol.frac_index is None

    def test_uncapacitated(self):
        sol = solve_lp(SpoInstance(TOY.values, TOY.weights, 100))
        assert np.all(sol.x == 1.0)
        assert sol.value == pytest.approx(14.0)
        assert sol.frac_index is None

    def test_sorted_prefix_shape(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            inst = random_zipf_instance(rng)
            sol = solve_lp(inst)
            frac = (sol.x > 0) & (sol.x < 1)
            assert frac.sum() <= 1
            order = np.argsort(-(inst.values / inst.weights), kind="stable")
            xs = sol.x[order]
            # after density sorting: ones, then at most one fraction, then zeros
            ones_end = int(np.sum(xs == 1.0))
            assert np.all(xs[:ones_end] == 1.0)
            tail = xs[ones_end:]
            if tail.size and tail[0] not in (0.0,):
                assert 0.0 < tail[0] < 1.0
                tail = tail[1:]
            assert np.all(tail == 0.0)
            assert int(inst.weights @ (sol.x > 0)) >= 0  # no dtype surprises
            assert float(inst.weights @ sol.x) <= inst.capacity + 1e-9

    def test_density_ties_break_by_ascending_index(self):
        inst = SpoInstance(np.array([2.0, 2.0, 2.0]), np.array([2, 2, 2]), 4)
        sol = solve_lp(inst)
        np.testing.assert_allclose(sol.x, [1.0, 1.0, 0.0])


class TestSolveGreedy:
    def test_toy_matches_enumeration(self):
        sol = solve_greedy(TOY)
        assert sol.x.tolist() == [1, 1, 0]
        assert sol.value == pytest.approx(9.0)
        best, _ = brute_optimum(TOY)
        assert best == pytest.approx(9.0)  # greedy happens to be optimal here
        assert sol.status == "approximate"
        assert sol.alpha_guarantee == 0.5 and sol.beta_guarantee == 1.0

    def test_equal_weights_is_optimal(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(2, 14))
            s = int(rng.integers(1, 10))
            values = rng.uniform(0.1, 10.0, size=n)
            inst = SpoInstance(values, np.full(n, s), int(rng.integers(0, n * s + 2)))
            best, _ = brute_optimum(inst)
            assert solve_greedy(inst).value == pytest.approx(best, abs=1e-12)

    def test_zero_capacity(self):
        sol = solve_greedy(SpoInstance(TOY.values, TOY.weights, 0))
        assert sol.value == 0.0 and sol.weight == 0 and not sol.chosen.size

    def test_skip_and_continue_dominates_floor(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            inst = random_zipf_instance(rng)
            floor = solve_greedy(inst)
            fill = solve_greedy(inst, skip_and_continue=True)
            assert fill.value >= floor.value - 1e-12
            assert fill.weight <= inst.capacity
            assert fill.alpha_guarantee == 0.0  # no factor claim for the variant


class TestSolveBnb:
    def test_toy_instance(self):
        sol = solve_bnb(TOY)
        assert sol.value == pytest.approx(9.0)
        assert sol.status == "optimal"

    def test_matches_bruteforce_on_random_instances(self):
        rng = np.random.default_rng(3)
        for _ in range(150):
            inst = random_zipf_instance(rng, max_files=14)
            assert solve_bnb(inst).value == solve_bruteforce(inst).value

    def test_uncapacitated_all_ones(self):
        inst = SpoInstance(TOY.values, TOY.weights, 9)
        sol = solve_bnb(inst)
        assert sol.x.tolist() == [1, 1, 1] and sol.status == "optimal"

    def test_timeout_returns_incumbent(self):
        # near-uniform values over many items make closure expensive
        n = 400
        sizes = np.tile([9, 7, 5, 3, 1], n // 5).astype(np.int64)
        values = (1.0 + 1e-9 * np.arange(n)) * sizes
        inst = SpoInstance(values, sizes, 256)
        sol = solve_bnb(inst, timeout_s=0.05)
        assert sol.status == "timeout-incumbent"
        assert sol.value >= solve_greedy(inst).value
        assert 0.0 < sol.alpha_guarantee <= 1.0

    def test_rejects_nonpositive_timeout(self):
        with pytest.raises(ValueError):
            solve_bnb(TOY, timeout_s=0.0)


class TestSolveBruteforce:
    def test_toy_instance(self):
        assert solve_bruteforce(TOY).value == pytest.approx(9.0)

    def test_nothing_fits(self):
        inst = SpoInstance(np.array([5.0, 4.0]), np.array([7, 9]), 3)
        sol = solve_bruteforce(inst)
        assert sol.value == 0.0 and not sol.chosen.size and sol.status == "optimal"

    def test_single_file_fits(self):
        inst = SpoInstance(np.array([5.0]), np.array([3]), 4)
        sol = solve_bruteforce(inst)
        assert sol.chosen.tolist() == [0] and sol.value == 5.0

    def test_rejects_large_instances(self):
        inst = SpoInstance(np.ones(26), np.ones(26, dtype=np.int64), 5)
        with pytest.raises(ValueError):
            solve_bruteforce(inst)


class TestCrossSolverInvariants:
    def test_sandwich_and_feasibility(self):
        rng = np.random.default_rng(4)
        for _ in range(150):
            inst = random_zipf_instance(rng)
            greedy = solve_greedy(inst)
            bnb = solve_bnb(inst)
            lp = solve_lp(inst)
            assert greedy.value <= bnb.value + 1e-9
            assert bnb.value <= lp.value + 1e-9
            for sol in (greedy, bnb):
                assert int(inst.weights[sol.chosen].sum()) <= inst.capacity
                assert sol.weight == int(inst.weights[sol.chosen].sum())

    def test_half_guarantee_on_doubly_sorted_instances(self):
        # values and densities both nonincreasing: the dropped fractional
        # item is worth no more than the first item of the prefix
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(3, 14))
            sizes = np.sort(rng.choice([1, 3, 5, 7, 9], size=n))[::-1].astype(np.int64)
            dens = np.sort(rng.uniform(0.1, 5.0, size=n))[::-1]
            inst = SpoInstance(dens * sizes, sizes, int(rng.integers(9, int(sizes.sum()) + 1)))
            best, _ = brute_optimum(inst)
            assert best / solve_greedy(inst).value <= 2.0 + 1e-9

    def test_zipf_ratio_respects_delta_bound(self):
        rng = np.random.default_rng(6)
        for _ in range(60):
            per_class = int(rng.integers(1, 4))
            catalog = build_catalog([(s, per_class) for s in (9, 7, 5, 3, 1)])
            gamma = float(rng.uniform(0.0, 2.4))
            profile = zipf_profile(catalog.num_files, gamma, 100)
            capacity = int(rng.integers(9, catalog.total_size + 1))
            inst = SpoInstance(profile.theta * catalog.sizes, catalog.sizes, capacity)
            ratio = solve_bruteforce(inst).value / solve_greedy(inst).value
            assert ratio <= delta_bound(catalog, capacity, gamma) + 1e-9

    def test_solvers_are_deterministic(self):
        rng = np.random.default_rng(7)
        inst = random_zipf_instance(rng)
        for solver in (solve_lp, solve_greedy, solve_bnb, solve_bruteforce):
            a, b = solver(inst), solver(inst)
            assert np.array_equal(a.x, b.x) and a.value == b.value


class TestDeltaBound:
    def test_flat_profile_equal_sizes_closed_form(self):
        # one size class s, capacity K*s, flat popularity: bound is 1 + 1/K
        for s, k in [(3, 4), (5, 10), (9, 2)]:
            catalog = build_catalog([(s, 50)])
            assert delta_bound(catalog, k * s, 0.0) == pytest.approx(1.0 + 1.0 / k)

    def test_canonical_parameters_against_independent_series(self):
        catalog = build_catalog([(s, 200) for s in (9, 7, 5, 3, 1)])
        expected = 1.0 + 9.0 * (29.0**-0.56) / math.fsum(i**-0.56 for i in range(1, 29))
        assert delta_bound(catalog, 256, 0.56) == pytest.approx(expected, rel=1e-12)

    def test_large_capacity_approaches_one(self):
        catalog = build_catalog([(s, 200) for s in (9, 7, 5, 3, 1)])
        assert delta_bound(catalog, 9 * 10**6, 0.56) < 1.01

    def test_capacity_below_largest_file_rejected(self):
        catalog = build_catalog([(s, 200) for s in (9, 7, 5, 3, 1)])
        with pytest.raises(ValueError):
            delta_bound(catalog, 8, 0.56)


class TestInstanceValidation:
    def test_rejects_bad_shapes_and_values(self):
        with pytest.raises(ValueError):
            SpoInstance(np.array([1.0]), np.array([1, 2]), 3)
        with pytest.raises(ValueError):
            SpoInstance(np.array([-1.0]), np.array([1]), 3)
        with pytest.raises(ValueError):
            SpoInstance(np.array([np.inf]), np.array([1]), 3)
        with pytest.raises(ValueError):
            SpoInstance(np.array([1.0]), np.array([0]), 3)
        with pytest.raises(ValueError):
            SpoInstance(np.array([1.0]), np.array([1]), -1)
