"""Split-and-shuffle secure summation over Z_q.

Each client splits its value into m additive shares and sends one share
through each of m two-round grid-shuffle instances.  The instances all
arrange clients by a single shared public permutation; the row shuffles
inside each instance are private and independent.  The server learns the
shuffled shares themselves, so the sum always comes out exactly, and the
security question is how little beyond the sum the full view reveals.

sigma_ikos and sigma_ikos_corrupted size that leakage in bits for honest
and partially corrupted populations.  dp_sum builds real-number
summation on top: quantize to a 1/sqrt(n) grid, add per-client discrete
noise whose total is a two-sided geometric, sum through the shuffle,
de-quantize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .accountant import DomainError, PreconditionViolated
from .seeds import child_seed, make_rng
from .shuffler import grid_shuffle

LOG2_E = math.log2(math.e)

SIGMA_MAX = 256.0
SIGMA_RESOLUTION = 1e-3

# smallest population the honest-case bound covers, and the slack the
# corrupted-case hypothesis demands at the returned sigma
MIN_CLIENTS = 361
MIN_SLACK = 19.0


class NotSquare(ValueError):
    """Client count must be a perfect square to fill the shuffle grid."""


class Infeasible(ValueError):
    """No security level >= 0 satisfies the corrupted-clients bound."""


def _square_side(n: int) -> int:
    k = math.isqrt(n) if n > 0 else 0
    if n < 1 or k * k != n:
        raise NotSquare(f"need a positive square number of clients, got {n}")
    return k


def split_shares(x: int, m: int, q: int, rng) -> list[int]:
    """Additive sharing: m - 1 uniform values plus a completing share."""
    if q < 2:
        raise DomainError(f"modulus must be at least 2, got {q}")
    if m < 1:
        raise DomainError(f"need at least one share, got m={m}")
    if not 0 <= x < q:
        raise DomainError(f"value {x} outside [0, {q})")
    shares = [rng.randrange(q) for _ in range(m - 1)]
    shares.append((x - sum(shares)) % q)
    return shares


@dataclass(frozen=True)
class IkosView:
    """Everything the server sees after one summation.

    shards holds one tuple per shuffle instance: the shares that came out
    of that instance, in output order.  public_perm is the arrangement
    all instances shared; it is known to everyone.
    """

    shards: tuple[tuple[int, ...], ...]
    public_perm: tuple[int, ...]
    m: int
    q: int

    @property
    def n(self) -> int:
        return len(self.public_perm)

    def total(self) -> int:
        return sum(v for shard in self.shards for v in shard) % self.q


def view_from_shares(
    share_rows: Sequence[Sequence[int]], q: int, seed: int
) -> IkosView:
    """Shuffle pre-split shares: row j feeds instance j.

    Splitting is the client's job; accepting raw rows lets tests inject
    inconsistent or adversarial shares.  Values are reduced mod q.
    """
    if q < 2:
        raise DomainError(f"modulus must be at least 2, got {q}")
    m = len(share_rows)
    if m < 1:
        raise DomainError("need at least one share row")
    n = len(share_rows[0])
    if any(len(row) != n for row in share_rows):
        raise DomainError("share rows must all have the same length")
    k = _square_side(n)
    public = list(range(n))
    make_rng(seed, "public").shuffle(public)
    shards = []
    for j, row in enumerate(share_rows):
        private = make_rng(seed, f"private/{j}")
        out = grid_shuffle(
            [v % q for v in row], k, k, 2, private, public_perm=public
        )
        shards.append(tuple(out))
    return IkosView(tuple(shards), tuple(public), m, q)


def ikos_view(xs: Sequence[int], m: int, q: int, seed: int) -> IkosView:
    """Split every input into m shares and shuffle each share set in its
    own instance, all under one shared public arrangement."""
    _square_side(len(xs))
    rng = make_rng(seed, "shares")
    per_client = [split_shares(x % q, m, q, rng) for x in xs]
    rows = [[shares[j] for shares in per_client] for j in range(m)]
    return view_from_shares(rows, q, seed)


def sigma_ikos(n: int, m: int, q: int) -> float:
    """Statistical security in bits for honest clients.

    Linear in m: every extra share buys (1/2) log2 n - log2 e bits.  Can
    be negative when the modulus eats the whole budget; callers decide
    what floor they need.
    """
    if q < 2:
        raise DomainError(f"modulus must be at least 2, got {q}")
    if n < MIN_CLIENTS or m < 3:
        raise PreconditionViolated(
            f"bound needs n >= {MIN_CLIENTS} and m >= 3, got n={n}, m={m}"
        )
    return (m - 2) * (0.5 * math.log2(n) - LOG2_E) - math.log2(q) - 2


def sigma_ikos_corrupted(n: int, m: int, q: int, gamma: float) -> float:
    """Largest security level sigma that survives a gamma fraction of
    corrupted clients.

    sigma appears on both sides of the guarantee, so this solves
        sigma <= (m-2) log2(((1-gamma) sqrt(n)
                             - sqrt(sigma + log2 n) n^(1/4)) / e)
                 - log2 q - 3
    by bisection; the right side is strictly decreasing in sigma.
    Raises Infeasible when sigma = 0 already fails, and
    PreconditionViolated when the solution lands where the bound's
    hypothesis (slack of at least 19 inside the log) does not hold.
    """
    if q < 2:
        raise DomainError(f"modulus must be at least 2, got {q}")
    if not 0 <= gamma < 1:
        raise DomainError(f"corruption fraction must be in [0, 1), got {gamma}")
    if _survivor_slack(n, 0.0, gamma) <= 0:
        # even a perfectly honest run of this size has no room
        raise Infeasible(f"no honest capacity at n={n}, gamma={gamma}")
    if m < 3:
        raise PreconditionViolated(f"bound needs m >= 3, got m={m}")

    def rhs(sigma: float) -> float:
        slack = _survivor_slack(n, sigma, gamma)
        if slack <= 0:
            return -math.inf
        return (m - 2) * math.log2(slack / math.e) - math.log2(q) - 3

    lo, hi = 0.0, SIGMA_MAX
    if rhs(lo) < lo:
        raise Infeasible(
            f"no sigma >= 0 satisfies the bound at n={n}, m={m}, "
            f"q={q}, gamma={gamma}"
        )
    if rhs(hi) >= hi:
        lo = hi
    while hi - lo > SIGMA_RESOLUTION:
        mid = (lo + hi) / 2
        if rhs(mid) >= mid:
            lo = mid
        else:
            hi = mid
    if _survivor_slack(n, lo, gamma) < MIN_SLACK:
        raise PreconditionViolated(
            f"hypothesis slack below {MIN_SLACK} at sigma={lo:.3f} "
            f"(n={n}, gamma={gamma})"
        )
    return lo


def _survivor_slack(n: int, sigma: float, gamma: float) -> float:
    """Honest mass left in a column after corruption and deviation:
    (1-gamma) sqrt(n) - sqrt(sigma + log2 n) n^(1/4)."""
    if n < 1:
        raise DomainError(f"need a positive client count, got {n}")
    return (1 - gamma) * math.sqrt(n) - math.sqrt(
        sigma + math.log2(n)
    ) * n**0.25


def dp_sum(
    reals: Sequence[float], eps: float, delta: float, m: int, seed: int
) -> tuple[float, dict]:
    """Differentially private sum of values in [0, 1].

    Quantizes to the grid 1/sqrt(n), carrying each rounding leftover
    into the next value so the total rounding error stays within half a
    step, has each client add the difference of two negative-binomial
    draws so the aggregate noise is a two-sided geometric at sensitivity
    sqrt(n), sums the noisy quantized values
    mod q = 2 n sqrt(n) through the split-and-shuffle view, then lifts
    the sum back to a signed value and de-quantizes.  eps = inf switches
    the noise off.  Returns (noisy sum, error statistics).
    """
    n = len(reals)
    k = _square_side(n)
    if any(not 0.0 <= x <= 1.0 for x in reals):
        raise DomainError("inputs must lie in [0, 1]")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if delta < 0:
        raise DomainError(f"delta must be nonnegative, got {delta}")
    if m < 1:
        raise DomainError(f"need at least one share, got m={m}")
    q = 2 * n * k
    # round onto the grid carrying the leftover into the next value:
    # each input still lands on an adjacent multiple of 1/k, but the
    # running residual stays within half a step, so the summed rounding
    # error is at most 1/(2k) no matter how many inputs there are
    quantized = []
    carry = 0.0
    for x in reals:
        z = min(k, max(0, math.floor(x * k + carry + 0.5)))
        carry += x * k - z
        quantized.append(z)
    if math.isinf(eps):
        noise = [0] * n
    else:
        gen = np.random.default_rng(child_seed(seed, "noise"))
        # sum of n negative-binomial(1/n, .) draws is one geometric with
        # ratio e^(-eps / sqrt(n)); the difference of two such sums is
        # the two-sided geometric mechanism at sensitivity sqrt(n)
        p_success = -math.expm1(-eps / k)
        pos = gen.negative_binomial(1.0 / n, p_success, size=n)
        neg = gen.negative_binomial(1.0 / n, p_success, size=n)
        noise = [int(a) - int(b) for a, b in zip(pos, neg)]
    values = [(z + e) % q for z, e in zip(quantized, noise)]
    view = ikos_view(values, m, q, seed)
    total = view.total()
    if 4 * total > 3 * q:
        total -= q
    result = total / k
    true_sum = sum(reals)
    quantized_sum = sum(quantized) / k
    stats = {
        "n": n,
        "m": m,
        "q": q,
        "eps": eps,
        "delta": delta,
        "true_sum": true_sum,
        "quantized_sum": quantized_sum,
        "noise_total": sum(noise),
        "result": result,
        "abs_error": abs(result - true_sum),
        "sq_error": (result - true_sum) ** 2,
    }
    return result, stats


def summation_report(n: int, m: int, q: int, gamma: float = 0.0) -> dict:
    """Sizing summary for one configuration: security in bits and the
    message width that pays for it."""
    if gamma > 0:
        sigma = sigma_ikos_corrupted(n, m, q, gamma)
    else:
        sigma = sigma_ikos(n, m, q)
    return {
        "n": n,
        "m": m,
        "q": q,
        "gamma": gamma,
        "sigma": sigma,
        "bits_per_message": math.ceil(math.log2(q)),
        "messages_per_client": m,
    }
