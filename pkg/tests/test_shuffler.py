import math
from fractions import Fraction

import pytest

from altshuffle.seeds import make_rng
from altshuffle.shuffler import (
    empirical_tvd,
    enumerate_distribution,
    grid_permutation,
    grid_shuffle,
    support_size,
    tvd_to_uniform,
)


class TestGridShuffle:
    def test_output_is_permutation(self):
        rng = make_rng(80, "gs")
        items = list(range(12))
        out = grid_shuffle(items, 3, 4, 2, rng)
        assert sorted(out) == items

    def test_bad_dims_rejected(self):
        with pytest.raises(ValueError):
            grid_shuffle(list(range(6)), 2, 2, 1, make_rng(80))
        with pytest.raises(ValueError):
            grid_shuffle(list(range(6)), 0, 6, 1, make_rng(80))

    def test_public_perm_applied_first(self):
        # with zero hiding work the public arrangement is the whole story:
        # one row, zero iterations is impossible, so compare through
        # grid_permutation on a fixed rng instead
        items = ["a", "b", "c", "d"]
        p1 = grid_shuffle(items, 2, 2, 1, make_rng(81, "x"), public_perm=[3, 2, 1, 0])
        p2 = grid_shuffle(["d", "c", "b", "a"], 2, 2, 1, make_rng(81, "x"))
        assert p1 == p2

    def test_matches_grid_permutation(self):
        items = list(range(8))
        out = grid_shuffle(items, 4, 2, 3, make_rng(82, "y"))
        perm = grid_permutation(8, 4, 2, 3, make_rng(82, "y"))
        assert out == [items[p] for p in perm]

    def test_single_row_is_full_shuffle(self):
        rng = make_rng(83, "z")
        out = grid_shuffle(list(range(5)), 1, 5, 1, rng)
        assert sorted(out) == list(range(5))


class TestExactDistribution:
    @pytest.mark.parametrize("n,h,w,ell,expect", [
        (4, 2, 2, 1, 4),
        (4, 2, 2, 2, 16),
        (5, 1, 5, 1, 120),
        (6, 2, 3, 1, 36),
        (8, 4, 2, 1, 16),
        (9, 3, 3, 1, 216),
    ])
    def test_support_sizes(self, n, h, w, ell, expect):
        assert support_size(n, h, w, ell) == expect

    def test_probabilities_sum_to_one(self):
        for (n, h, w, ell) in [(4, 2, 2, 1), (4, 2, 2, 2), (6, 2, 3, 1)]:
            dist = enumerate_distribution(n, h, w, ell)
            assert sum(dist.values()) == 1

    def test_uniform_on_support_2x2x2(self):
        dist = enumerate_distribution(4, 2, 2, 2)
        assert len(dist) == 16
        assert set(dist.values()) == {Fraction(1, 16)}

    def test_single_row_uniform_over_all_perms(self):
        dist = enumerate_distribution(4, 1, 4, 1)
        assert len(dist) == math.factorial(4)
        assert set(dist.values()) == {Fraction(1, 24)}
        assert tvd_to_uniform(dist, 4) == 0

    def test_tvd_monotone_in_iterations_n4(self):
        tvds = [tvd_to_uniform(enumerate_distribution(4, 2, 2, l), 4)
                for l in (1, 2, 4, 6)]
        assert all(a > b for a, b in zip(tvds, tvds[1:]))

    def test_tvd_monotone_in_iterations_n6(self):
        tvds = [tvd_to_uniform(enumerate_distribution(6, 2, 3, l), 6)
                for l in (1, 2, 4, 6)]
        assert all(a > b for a, b in zip(tvds, tvds[1:]))
        assert tvds[0] == Fraction(19, 20)

    def test_tvd_counts_unreached_perms(self):
        # one iteration of 2x2 reaches 4 of 24 perms, each with mass 1/4:
        # tvd = sum over support of (1/4 - 1/24) + 20/24 missing mass, halved
        dist = enumerate_distribution(4, 2, 2, 1)
        expect = Fraction(4 * (Fraction(1, 4) - Fraction(1, 24)) + Fraction(20, 24), 2)
        assert tvd_to_uniform(dist, 4) == expect


class TestEmpirical:
    def test_sampler_matches_enumeration(self):
        n, h, w, ell = 4, 2, 2, 2
        dist = enumerate_distribution(n, h, w, ell)
        rng = make_rng(84, "emp")
        counts: dict[tuple, int] = {}
        total = 20000
        for _ in range(total):
            p = tuple(grid_permutation(n, h, w, ell, rng))
            counts[p] = counts.get(p, 0) + 1
        assert set(counts) <= set(dist)
        assert empirical_tvd(counts, total, dist) < 0.02

    def test_sampler_far_from_wrong_distribution(self):
        # sampling a one-iteration grid against the two-iteration truth
        # must show the gap
        dist2 = enumerate_distribution(4, 2, 2, 2)
        rng = make_rng(85, "emp")
        counts: dict[tuple, int] = {}
        total = 4000
        for _ in range(total):
            p = tuple(grid_permutation(4, 2, 2, 1, rng))
            counts[p] = counts.get(p, 0) + 1
        assert empirical_tvd(counts, total, dist2) > 0.5
