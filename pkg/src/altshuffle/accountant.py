"""Privacy accounting for grid shuffling, and the attacks that bound it.

Closed forms first: amplification by subsampling, amplification by
uniform shuffling, and their composition across the columns of a grid
shuffle (with and without corrupted clients).  All differential privacy
formulas use natural logarithms.

Then two Monte-Carlo attack oracles.  The first exhibits a randomizer
whose grid-shuffled output stays distinguishable even though a uniform
shuffle would hide it; the second traces values through a grid shuffle
with a known public arrangement to break the obliviousness of the
permutation itself.  A generic two-mechanism advantage estimator backs
both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import expm1, log, log1p, sqrt
from typing import Callable, Optional

from .shuffler import grid_shuffle


class DomainError(ValueError):
    """An argument is outside the formula's domain."""


class PreconditionViolated(ValueError):
    """The amplification bound does not apply at these parameters."""


class TooManyCorruptions(ValueError):
    """Corruption fraction leaves no effective grid to amplify with."""


@dataclass(frozen=True)
class PrivacyBound:
    """An (eps, delta) guarantee and which bound produced it."""

    eps: float
    delta: float
    source: str

    def __post_init__(self):
        if not math.isfinite(self.eps) or self.eps < 0:
            raise DomainError(f"eps must be finite and nonnegative, got {self.eps}")
        if self.delta < 0:
            raise DomainError(f"delta must be nonnegative, got {self.delta}")
        if self.delta > 1:
            # any mechanism satisfies the bound at delta = 1; report that
            object.__setattr__(self, "delta", 1.0)

    def as_dict(self) -> dict:
        return {"eps": self.eps, "delta": self.delta, "source": self.source}


@dataclass(frozen=True)
class AmpChain:
    """Audit trail of the column-composition argument.

    gamma bounds the posterior probability that the distinguished client
    sits in any particular column; eps_S is the per-column uniform
    shuffling loss; eps_C folds in the posterior; eps_total and
    delta_total come out of advanced composition over the w columns.
    """

    gamma: float
    eps_S: float
    eps_C: float
    eps_total: float
    delta_total: float
    trace: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise DomainError(f"gamma must be in (0, 1], got {self.gamma}")

    def recompute(self) -> "AmpChain":
        """Re-derive every intermediate from the recorded inputs."""
        t = self.trace
        _, chain = weak_amp(
            t["eps0"], t["delta"], t["delta_prime"], t["h"], t["w"]
        )
        return chain

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "eps_S": self.eps_S,
            "eps_C": self.eps_C,
            "eps_total": self.eps_total,
            "delta_total": self.delta_total,
            "trace": dict(self.trace),
        }


# closed forms

def eps_sampling(eps0: float, gamma: float) -> float:
    """Privacy of a gamma-mixture with a neutral distribution."""
    if eps0 < 0 or not math.isfinite(eps0):
        raise DomainError(f"eps0 must be finite and nonnegative, got {eps0}")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must be in [0, 1], got {gamma}")
    return log1p(gamma * expm1(eps0))


def clones_applies(eps0: float, delta: float, n: int) -> bool:
    """Whether the uniform-shuffling bound's side condition holds."""
    arg = n / (8.0 * log(2.0 / delta)) - 1.0
    return arg > 0 and eps0 <= log(arg)


def eps_clones(eps0: float, delta: float, n: int, *, check: bool = True) -> float:
    """Central eps after uniformly shuffling n copies of an eps0 randomizer.

    check=False evaluates the closed form even where the side condition
    fails; callers that do so must surface the flag themselves.
    """
    if eps0 < 0 or not math.isfinite(eps0):
        raise DomainError(f"eps0 must be finite and nonnegative, got {eps0}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0, 1), got {delta}")
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if check and not clones_applies(eps0, delta, n):
        raise PreconditionViolated(
            f"uniform-shuffling bound needs eps0 <= log(n/(8 log(2/delta)) - 1); "
            f"eps0={eps0}, delta={delta}, n={n}"
        )
    e = expm1(eps0)
    return log1p(e * (sqrt(32.0 * log(4.0 / delta) / ((e + 2.0) * n)) + 4.0 / n))


def weak_amp(
    eps0: float, delta: float, delta_prime: float, h: int, w: int
) -> tuple[PrivacyBound, AmpChain]:
    """Grid shuffle amplification: compose the per-column loss over w columns.

    The chain is evaluated even when the per-column side condition fails
    (trace key "column_bound_applies" says which); some well-known
    operating points sit outside it while the composed value is still
    the quantity of interest.
    """
    if h < 1 or w < 1:
        raise DomainError(f"grid must be at least 1x1, got {h}x{w}")
    if not 0.0 < delta < 1.0 or not 0.0 < delta_prime < 1.0:
        raise DomainError("delta and delta_prime must be in (0, 1)")
    if eps0 < 0 or not math.isfinite(eps0):
        raise DomainError(f"eps0 must be finite and nonnegative, got {eps0}")
    e2 = math.exp(2.0 * eps0)
    gamma = e2 / (e2 + w - 1.0)
    eps_S = eps_clones(eps0, delta, h, check=False)
    eps_C = eps_sampling(eps_S, gamma)
    eps_total = eps_C * (
        sqrt(2.0 * w * log(1.0 / delta_prime))
        + w * expm1(eps_C) / (math.exp(eps_C) + 1.0)
    )
    delta_total = w * gamma * delta + delta_prime
    chain = AmpChain(
        gamma=gamma,
        eps_S=eps_S,
        eps_C=eps_C,
        eps_total=eps_total,
        delta_total=delta_total,
        trace={
            "eps0": eps0,
            "delta": delta,
            "delta_prime": delta_prime,
            "h": h,
            "w": w,
            "column_bound_applies": clones_applies(eps0, delta, h),
        },
    )
    return PrivacyBound(eps_total, delta_total, "grid-weak"), chain


def weak_amp_corrupted(
    eps0: float,
    delta: float,
    delta_w: float,
    delta_h: float,
    delta_prime: float,
    h: int,
    w: int,
    gamma_frac: float,
) -> tuple[PrivacyBound, AmpChain]:
    """Grid amplification with a gamma_frac fraction of colluding clients.

    A public permutation spreads the colluders, so with probability
    1 - delta_w - delta_h every column and row keeps at least w' and h'
    honest participants; the honest-only chain is then evaluated at the
    shrunken grid.
    """
    if not 0.0 <= gamma_frac < 1.0:
        raise DomainError(f"gamma_frac must be in [0, 1), got {gamma_frac}")
    if not 0.0 < delta_w < 1.0 or not 0.0 < delta_h < 1.0:
        raise DomainError("delta_w and delta_h must be in (0, 1)")
    w_eff = (1.0 - gamma_frac) * w - log(1.0 / delta_w) \
        - sqrt(2.0 * gamma_frac * w * log(1.0 / delta_w))
    h_eff = (1.0 - gamma_frac) * h - log(w / delta_h) \
        - sqrt(2.0 * gamma_frac * h * log(w / delta_h))
    if w_eff < 2.0 or h_eff < 2.0:
        raise TooManyCorruptions(
            f"effective grid {h_eff:.3g}x{w_eff:.3g} is too small "
            f"(gamma_frac={gamma_frac})"
        )
    bound, chain = weak_amp(eps0, delta, delta_prime, h_eff, w_eff)
    delta_total = chain.delta_total + delta_w + delta_h
    chain = AmpChain(
        gamma=chain.gamma,
        eps_S=chain.eps_S,
        eps_C=chain.eps_C,
        eps_total=chain.eps_total,
        delta_total=delta_total,
        trace={
            **chain.trace,
            "gamma_frac": gamma_frac,
            "delta_w": delta_w,
            "delta_h": delta_h,
            "w_eff": w_eff,
            "h_eff": h_eff,
        },
    )
    return PrivacyBound(chain.eps_total, delta_total, "grid-weak-corrupted"), chain


def square_grid_bound(eps0: float, delta: float, n: int) -> tuple[PrivacyBound, AmpChain]:
    """Convenience form for an sqrt(n) x sqrt(n) grid with delta' = delta.

    delta comes out as (1 + sqrt(n) e^{2 eps0} / (sqrt(n) + e^{2 eps0}))
    times the input delta.
    """
    k = math.isqrt(n)
    if k * k != n:
        raise DomainError(f"n must be a perfect square, got {n}")
    _, chain = weak_amp(eps0, delta, delta, k, k)
    e2 = math.exp(2.0 * eps0)
    rt = float(k)
    delta_a = (1.0 + rt * e2 / (rt + e2)) * delta
    return PrivacyBound(chain.eps_total, delta_a, "grid-square"), chain


# attack oracles

def _randomize_bits(xs: list[int], flip_p: float, rng) -> list[int]:
    # each bit flips independently with probability flip_p = 1/(1+e^eps0)
    return [(1 - x) if rng.random() < flip_p else x for x in xs]


def _has_zero_column(ys: list[int], k: int) -> bool:
    for j in range(k):
        if all(ys[j + i * k] == 0 for i in range(k)):
            return True
    return False


def attack_no_strong_amp(
    k: int, eps0: float, trials: int, rng
) -> tuple[float, float]:
    """Distinguishing frequencies for the structured-row counterexample.

    n = k^2 clients; one database puts a zero among k - 1 ones in the
    first row, the other puts a one there.  The event is an all-zero
    column of the grid-shuffled randomized bits.  With eps0 large the
    frequencies separate, certifying that two grid iterations are not a
    uniform shuffle's equal.
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    n = k * k
    flip_p = 1.0 / (1.0 + math.exp(eps0))
    base = [1] * k + [0] * (n - k)
    hits = [0, 0]
    for world in (0, 1):
        xs = list(base)
        xs[0] = world
        for _ in range(trials):
            ys = grid_shuffle(_randomize_bits(xs, flip_p, rng), k, k, 2, rng)
            if _has_zero_column(ys, k):
                hits[world] += 1
    return hits[0] / trials, hits[1] / trials


def _trace_adversary_guess(
    out: list[int], pi: list[int], swapped: tuple[int, int], k: int
) -> Optional[int]:
    """Guess the world from the output arrangement, or None for a coin.

    The adversary knows the public arrangement pi and both candidate
    inputs (identity values, with the two tracked values swapped in
    world 1).  Row companions of the first tracked value pin down its
    output column; seeing which tracked value landed there decides the
    world when they separated.
    """
    n = k * k
    a, b = swapped
    # grid slot s holds input value pi[s] in world 0
    slot_of = {pi[s]: s for s in range(n)}
    row_a = slot_of[a] // k
    row_b = slot_of[b] // k
    if row_a == row_b:
        return None
    companions = {pi[row_a * k + c] for c in range(k)} - {a}
    col_of = {}
    for s, v in enumerate(out):
        col_of[v] = s % k
    taken = {col_of[v] for v in companions}
    free = [j for j in range(k) if j not in taken]
    if len(free) != 1:
        # only possible against an unstructured shuffle
        return None
    j = free[0]
    in_j = (col_of[a] == j, col_of[b] == j)
    if in_j == (True, False):
        return 0
    if in_j == (False, True):
        return 1
    return None


def attack_not_do(
    n: int, trials: int, rng, *, mechanism: str = "grid"
) -> float:
    """Success rate of tracing one transposition through the shuffler.

    All n inputs distinct; the challenger swaps two of them or not, then
    applies a public arrangement followed by the two-iteration grid
    shuffle.  mechanism="uniform" runs the same adversary against a
    uniformly shuffled control, where it should do no better than a
    coin.
    """
    k = math.isqrt(n)
    if k * k != n:
        raise DomainError(f"n must be a perfect square, got {n}")
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    if mechanism not in ("grid", "uniform"):
        raise DomainError(f"unknown mechanism {mechanism!r}")
    swapped = (0, 1)
    wins = 0
    for _ in range(trials):
        world = rng.randrange(2)
        values = list(range(n))
        if world == 1:
            values[0], values[1] = values[1], values[0]
        pi = list(range(n))
        rng.shuffle(pi)
        arranged = [values[p] for p in pi]
        if mechanism == "grid":
            out = grid_shuffle(arranged, k, k, 2, rng)
        else:
            out = list(arranged)
            rng.shuffle(out)
        # the adversary reasons from the world-0 placement (slot s holds
        # value pi[s]); the tracked values carry the world difference
        guess = _trace_adversary_guess(out, pi, swapped, k)
        if guess is None:
            guess = rng.randrange(2)
        if guess == world:
            wins += 1
    return wins / trials


@dataclass(frozen=True)
class AdvantageEstimate:
    advantage: float
    stderr: float
    ci_low: float
    ci_high: float
    p_a: float
    p_b: float

    def as_dict(self) -> dict:
        return {
            "advantage": self.advantage,
            "stderr": self.stderr,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "p_a": self.p_a,
            "p_b": self.p_b,
        }


def estimate_indistinguishability(
    mech_a: Callable,
    mech_b: Callable,
    event_fn: Callable,
    trials: int,
    rng,
) -> AdvantageEstimate:
    """|P_a(E) - P_b(E)| with a normal-approximation interval."""
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    hits_a = sum(1 for _ in range(trials) if event_fn(mech_a(rng)))
    hits_b = sum(1 for _ in range(trials) if event_fn(mech_b(rng)))
    p_a, p_b = hits_a / trials, hits_b / trials
    se = sqrt(p_a * (1 - p_a) / trials + p_b * (1 - p_b) / trials)
    adv = abs(p_a - p_b)
    return AdvantageEstimate(
        advantage=adv,
        stderr=se,
        ci_low=max(0.0, adv - 1.96 * se),
        ci_high=min(1.0, adv + 1.96 * se),
        p_a=p_a,
        p_b=p_b,
    )
