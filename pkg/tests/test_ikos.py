"""Split-and-shuffle summation: sharing, views, sizing formulas, DP sum.

Golden values are frozen high-precision oracle evaluations (60-digit
arithmetic for the closed forms, exact integer enumeration for the tiny
statistical distances), recorded before the module was written.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from altshuffle.accountant import DomainError, PreconditionViolated
from altshuffle.ikos import (
    Infeasible,
    NotSquare,
    dp_sum,
    ikos_view,
    sigma_ikos,
    sigma_ikos_corrupted,
    split_shares,
    summation_report,
    view_from_shares,
)
from altshuffle.seeds import child_seed, make_rng
from altshuffle.shuffler import enumerate_distribution

REL = 1e-9
# the corrupted sizing runs a bisection with 1e-3 resolution
SIGMA_TOL = 2e-3

GOLD_HONEST_N1E6_M6_Q2P20 = (
    12.0923569750924945450041344298651135606713928996830236081153
)
GOLD_HONEST_N1E6_M5_Q2P20 = (
    3.56926773131937090875310082239883517050354467476226770608646
)
GOLD_HONEST_N1E6_M4_Q2P10 = (
    5.04617848754624727250206721493255678033569644984151180405764
)
GOLD_CORRUPT_N1E6_M5_Q2P20_G0 = (
    1.87767145254523521443291119911404128344510202540838692661973
)
GOLD_CORRUPT_N1E6_M4_Q2P10_G0 = (
    3.56606032357823809305962664272215200383598053504635117697113
)
GOLD_CORRUPT_N1E6_M6_Q2P20_G005 = (
    9.64390899070169621988899618182196585183704222484730484482664
)
GOLD_CORRUPT_GAMMA_GRID = {
    0.0: 9.996218377621004,
    0.05: 9.643908990701696,
    0.1: 9.26925014511658,
    0.2: 8.440327527755768,
    0.3: 7.476813036124437,
}
# exact enumeration at n=4, q=3, worlds (0,0,0,0) vs (1,2,0,0)
GOLD_TINY_SD_M2 = Fraction(2, 3)
GOLD_TINY_SD_M3 = Fraction(2281, 8748)


class TestSplitShares:
    def test_single_share_is_identity(self):
        assert split_shares(7, 1, 11, make_rng(0)) == [7]

    def test_shares_resum_many_cases(self):
        rng = make_rng(11, "resum")
        for _ in range(10_000):
            q = rng.randrange(2, 1 << 20)
            m = rng.randrange(1, 8)
            x = rng.randrange(q)
            shares = split_shares(x, m, q, rng)
            assert len(shares) == m
            assert all(0 <= s < q for s in shares)
            assert sum(shares) % q == x

    def test_parity_of_binary_shares(self):
        rng = make_rng(3, "parity")
        for _ in range(200):
            shares = split_shares(1, 3, 2, rng)
            assert sum(shares) % 2 == 1

    def test_free_shares_look_uniform(self):
        rng = make_rng(5, "uniform")
        counts = [0] * 5
        trials = 5_000
        for _ in range(trials):
            counts[split_shares(2, 2, 5, rng)[0]] += 1
        se = math.sqrt(0.2 * 0.8 / trials)
        for c in counts:
            assert abs(c / trials - 0.2) <= 3 * se

    def test_domain_errors(self):
        rng = make_rng(0)
        with pytest.raises(DomainError):
            split_shares(5, 2, 5, rng)
        with pytest.raises(DomainError):
            split_shares(-1, 2, 5, rng)
        with pytest.raises(DomainError):
            split_shares(0, 0, 5, rng)
        with pytest.raises(DomainError):
            split_shares(0, 2, 1, rng)


class TestView:
    @pytest.mark.parametrize("n", [4, 9, 16])
    @pytest.mark.parametrize("m", [1, 2, 3])
    @pytest.mark.parametrize("q", [3, 17, 1 << 16])
    def test_sum_invariance(self, n, m, q):
        rng = make_rng(n * 1000 + m * 10 + q, "inputs")
        xs = [rng.randrange(q) for _ in range(n)]
        for seed in range(5):
            view = ikos_view(xs, m, q, seed)
            assert view.total() == sum(xs) % q
            assert view.n == n and view.m == m and view.q == q
            assert len(view.shards) == m
            assert all(len(s) == n for s in view.shards)
            assert all(0 <= v < q for s in view.shards for v in s)

    def test_all_zero_inputs(self):
        # shares of zero are still random; only the total collapses
        for seed in range(10):
            assert ikos_view([0] * 9, 3, 7, seed).total() == 0
            assert ikos_view([0] * 4, 1, 5, seed).total() == 0

    def test_public_perm_is_shared_and_valid(self):
        view = ikos_view(list(range(16)), 2, 17, 42)
        assert sorted(view.public_perm) == list(range(16))
        # same seed reproduces the whole view; a fresh seed rearranges
        again = ikos_view(list(range(16)), 2, 17, 42)
        assert again == view
        other = ikos_view(list(range(16)), 2, 17, 43)
        assert other.public_perm != view.public_perm

    def test_instance_permutations_lie_in_grid_support(self):
        # mark shares so the realized mapping is recoverable, then check
        # every instance applied a permutation the 2x2 two-round grid
        # can produce relative to the shared public arrangement
        support = set(enumerate_distribution(4, 2, 2, 2))
        rows = [[10 * j + i for i in range(4)] for j in range(2)]
        for seed in range(100):
            view = view_from_shares(rows, 101, seed)
            inv = {c: s for s, c in enumerate(view.public_perm)}
            for j, shard in enumerate(view.shards):
                clients = [v - 10 * j for v in shard]
                key = tuple(inv[c] for c in clients)
                assert key in support

    def test_values_reduced_mod_q(self):
        q = 11
        base = ikos_view([1, 2, 3, 4], 2, q, 7)
        view = view_from_shares([[1 + q, 2, 3 + 5 * q, 4]], q, 7)
        assert view.total() == 10 % q
        assert base.total() == 10 % q

    def test_malicious_shares_shift_sum_by_their_delta(self):
        q = 97
        rng = make_rng(8, "mal")
        xs = [rng.randrange(q) for _ in range(9)]
        shares = [split_shares(x, 3, q, rng) for x in xs]
        rows = [[s[j] for s in shares] for j in range(3)]
        honest = view_from_shares(rows, q, 5).total()
        junk = [41, 0, 88]
        delta = (sum(junk) - sum(shares[4])) % q
        bad_rows = [list(r) for r in rows]
        for j in range(3):
            bad_rows[j][4] = junk[j]
        tampered = view_from_shares(bad_rows, q, 5).total()
        assert (tampered - honest) % q == delta

    def test_shape_errors(self):
        with pytest.raises(NotSquare):
            ikos_view([1, 2, 3], 2, 7, 0)
        with pytest.raises(NotSquare):
            ikos_view([], 2, 7, 0)
        with pytest.raises(DomainError):
            view_from_shares([[1, 2, 3, 4], [1, 2]], 7, 0)
        with pytest.raises(DomainError):
            view_from_shares([], 7, 0)
        with pytest.raises(DomainError):
            ikos_view([0, 0, 0, 0], 0, 7, 0)
        with pytest.raises(DomainError):
            ikos_view([0, 0, 0, 0], 2, 1, 0)


def _tiny_view_sd(m: int) -> Fraction:
    """Exact statistical distance between server views of two equal-sum
    inputs at n=4, q=3, by enumeration.

    Conditions on the public arrangement (only its row partition
    matters: the first shuffle round erases within-row order), averages
    over the three balanced partitions, and enumerates every share
    combination and every per-instance grid permutation.  The 2x2
    two-round grid is uniform on its 16-permutation support, so counting
    outcomes gives the exact distribution.
    """
    q, n = 3, 4
    worlds = [(0, 0, 0, 0), (1, 2, 0, 0)]
    partitions = [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)]
    keys = np.array(sorted(enumerate_distribution(4, 2, 2, 2)), dtype=np.int64)
    size = q ** (n * m)
    pows = q ** np.arange(n * m, dtype=np.int64)
    numerator = 0
    per_partition_total = (q ** ((m - 1) * n)) * (16**m)

    def share_matrices(xs):
        free = list(itertools.product(range(q), repeat=(m - 1) * n))
        arr = np.array(free, dtype=np.int64).reshape(len(free), m - 1, n)
        last = (np.array(xs) - arr.sum(axis=1)) % q
        return np.concatenate([arr, last[:, None, :]], axis=1)

    for part in partitions:
        counts = []
        for xs in worlds:
            arranged = share_matrices(xs)[:, :, part]
            contrib = [
                (arranged[:, j, :][:, keys] * pows[j * n : (j + 1) * n])
                .sum(axis=2)
                .T
                for j in range(m)
            ]
            total = contrib[0].reshape(
                [16] + [1] * (m - 1) + [contrib[0].shape[-1]]
            )
            for j in range(1, m):
                shape = [1] * m + [contrib[j].shape[-1]]
                shape[j] = 16
                total = total + contrib[j].reshape(shape)
            counts.append(np.bincount(total.ravel(), minlength=size))
        numerator += int(np.abs(counts[0] - counts[1]).sum())
    return Fraction(numerator, 2 * len(partitions) * per_partition_total)


class TestTinyDistance:
    def test_exact_distances_and_monotonicity(self):
        sd2 = _tiny_view_sd(2)
        sd3 = _tiny_view_sd(3)
        assert sd2 == GOLD_TINY_SD_M2
        assert sd3 == GOLD_TINY_SD_M3
        assert sd3 < sd2


class TestSigmaHonest:
    def test_golden_values(self):
        assert sigma_ikos(10**6, 6, 1 << 20) == pytest.approx(
            GOLD_HONEST_N1E6_M6_Q2P20, rel=REL
        )
        assert sigma_ikos(10**6, 5, 1 << 20) == pytest.approx(
            GOLD_HONEST_N1E6_M5_Q2P20, rel=REL
        )
        assert sigma_ikos(10**6, 4, 1 << 10) == pytest.approx(
            GOLD_HONEST_N1E6_M4_Q2P10, rel=REL
        )

    @pytest.mark.parametrize("n,m", [(10**6, 3), (10**4, 5), (361, 3)])
    def test_each_extra_share_buys_fixed_bits(self, n, m):
        step = 0.5 * math.log2(n) - math.log2(math.e)
        got = sigma_ikos(n, m + 1, 1 << 20) - sigma_ikos(n, m, 1 << 20)
        assert got == pytest.approx(step, rel=1e-12)

    def test_value_can_go_negative(self):
        # a wide modulus can eat the whole budget; no clamping
        val = sigma_ikos(10**6, 4, 1 << 20)
        assert -5.0 < val < -4.9

    def test_preconditions(self):
        with pytest.raises(PreconditionViolated):
            sigma_ikos(100, 6, 1 << 20)
        with pytest.raises(PreconditionViolated):
            sigma_ikos(10**6, 2, 1 << 20)
        with pytest.raises(DomainError):
            sigma_ikos(10**6, 6, 1)
        assert math.isfinite(sigma_ikos(361, 3, 4))


class TestSigmaCorrupted:
    def test_golden_values(self):
        assert sigma_ikos_corrupted(10**6, 5, 1 << 20, 0.0) == pytest.approx(
            GOLD_CORRUPT_N1E6_M5_Q2P20_G0, abs=SIGMA_TOL
        )
        assert sigma_ikos_corrupted(10**6, 4, 1 << 10, 0.0) == pytest.approx(
            GOLD_CORRUPT_N1E6_M4_Q2P10_G0, abs=SIGMA_TOL
        )
        assert sigma_ikos_corrupted(10**6, 6, 1 << 20, 0.05) == pytest.approx(
            GOLD_CORRUPT_N1E6_M6_Q2P20_G005, abs=SIGMA_TOL
        )

    def test_zero_corruption_tracks_honest_bound(self):
        for m, q in [(5, 1 << 20), (4, 1 << 10)]:
            honest = sigma_ikos(10**6, m, q)
            corrupted = sigma_ikos_corrupted(10**6, m, q, 0.0)
            assert corrupted <= honest + 1
            assert honest - corrupted <= 2

    def test_monotone_decreasing_in_gamma(self):
        values = [
            sigma_ikos_corrupted(10**6, 6, 1 << 20, g)
            for g in sorted(GOLD_CORRUPT_GAMMA_GRID)
        ]
        for got, want in zip(values, sorted(GOLD_CORRUPT_GAMMA_GRID)):
            assert got == pytest.approx(
                GOLD_CORRUPT_GAMMA_GRID[want], abs=SIGMA_TOL
            )
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_hypothesis_slack_at_solution(self):
        sigma = sigma_ikos_corrupted(10**6, 6, 1 << 20, 0.05)
        slack = 0.95 * 1000.0 - math.sqrt(sigma + math.log2(10**6)) * 10**1.5
        assert slack >= 19

    def test_infeasible_cases(self):
        with pytest.raises(Infeasible):
            sigma_ikos_corrupted(400, 3, 1 << 20, 0.5)
        with pytest.raises(Infeasible):
            sigma_ikos_corrupted(10**6, 3, 1 << 20, 0.0)
        with pytest.raises(Infeasible):
            sigma_ikos_corrupted(10**6, 6, 1 << 20, 0.999)

    def test_domain_and_preconditions(self):
        with pytest.raises(DomainError):
            sigma_ikos_corrupted(10**6, 6, 1 << 20, 1.0)
        with pytest.raises(DomainError):
            sigma_ikos_corrupted(10**6, 6, 1 << 20, -0.1)
        with pytest.raises(DomainError):
            sigma_ikos_corrupted(10**6, 6, 1, 0.0)
        with pytest.raises(PreconditionViolated):
            sigma_ikos_corrupted(10**6, 2, 1 << 20, 0.0)


class TestDpSum:
    def test_noise_off_leaves_only_quantization_error(self):
        rng = make_rng(2024, "dp-inputs")
        reals = [rng.random() for _ in range(400)]
        result, stats = dp_sum(reals, math.inf, 1e-6, 3, seed=1)
        assert result == stats["quantized_sum"]
        assert stats["noise_total"] == 0
        assert abs(result - sum(reals)) <= 0.5

    def test_empirical_mse_matches_noise_variance(self):
        n = 400
        rng = make_rng(77, "mse-inputs")
        reals = [rng.random() for _ in range(n)]
        p = math.exp(-1.0 / math.sqrt(n))
        reference = 2 * p / (1 - p) ** 2 / n
        runs = 1000
        acc = 0.0
        for i in range(runs):
            result, stats = dp_sum(reals, 1.0, 1e-6, 3, seed=child_seed(9, f"run/{i}"))
            acc += (result - stats["quantized_sum"]) ** 2
        mse = acc / runs
        assert reference / 4 <= mse <= reference * 4

    def test_full_scale_inputs_do_not_wrap(self):
        result, stats = dp_sum([1.0] * 16, math.inf, 0.0, 2, seed=3)
        assert result == 16.0
        assert stats["true_sum"] == 16.0
        assert stats["abs_error"] == 0.0

    def test_negative_totals_lift_below_zero(self):
        # all-zero inputs leave pure noise; the centered lift must
        # reproduce it exactly, sign included
        k = 4
        for seed in range(20):
            result, stats = dp_sum([0.0] * 16, 1.0, 0.0, 2, seed=seed)
            assert result == stats["noise_total"] / k
        assert any(
            dp_sum([0.0] * 16, 1.0, 0.0, 2, seed=s)[0] < 0 for s in range(20)
        )

    def test_deterministic_in_seed(self):
        reals = [0.25] * 25
        a = dp_sum(reals, 2.0, 0.0, 2, seed=5)
        b = dp_sum(reals, 2.0, 0.0, 2, seed=5)
        c = dp_sum(reals, 2.0, 0.0, 2, seed=6)
        assert a == b
        assert a[0] != c[0] or a[1]["noise_total"] != c[1]["noise_total"]

    def test_domain_errors(self):
        with pytest.raises(NotSquare):
            dp_sum([0.5] * 5, 1.0, 0.0, 2, seed=0)
        with pytest.raises(DomainError):
            dp_sum([0.5] * 4, 0.0, 0.0, 2, seed=0)
        with pytest.raises(DomainError):
            dp_sum([0.5] * 4, -1.0, 0.0, 2, seed=0)
        with pytest.raises(DomainError):
            dp_sum([1.5] * 4, 1.0, 0.0, 2, seed=0)
        with pytest.raises(DomainError):
            dp_sum([0.5] * 4, 1.0, -0.1, 2, seed=0)
        with pytest.raises(DomainError):
            dp_sum([0.5] * 4, 1.0, 0.0, 0, seed=0)


class TestReport:
    def test_honest_report(self):
        report = summation_report(10**6, 6, 1 << 20)
        assert report["sigma"] == pytest.approx(
            GOLD_HONEST_N1E6_M6_Q2P20, rel=REL
        )
        assert report["bits_per_message"] == 20
        assert report["messages_per_client"] == 6
        assert report["gamma"] == 0.0

    def test_corrupted_report(self):
        report = summation_report(10**6, 6, 1 << 20, gamma=0.05)
        assert report["sigma"] == pytest.approx(
            GOLD_CORRUPT_N1E6_M6_Q2P20_G005, abs=SIGMA_TOL
        )

    def test_infeasible_propagates(self):
        with pytest.raises(Infeasible):
            summation_report(400, 3, 1 << 20, gamma=0.5)
