"""Threshold secret sharing over the scalar field, with public commitments.

Secrets are scalars mod the group order q.  A (t, n) sharing samples a
polynomial of degree t - 1, so any t shares reconstruct and t - 1 reveal
nothing.  The dealer also publishes per-coefficient commitments g^{a_k};
anyone can derive the expected commitment g^{f(j)} for share j and check a
delivered share against it.

Indices are 1-based: share j is f(j), and j = 0 would leak the secret.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .group import ExpCounter, SchnorrGroup


class ShamirError(ValueError):
    pass


class InvalidThreshold(ShamirError):
    pass


class NotEnoughShares(ShamirError):
    pass


class Share(NamedTuple):
    index: int
    value: int


def share_secret(
    group: SchnorrGroup,
    secret: int,
    n: int,
    t: int,
    rng,
    counter: ExpCounter | None = None,
) -> tuple[list[Share], list[int]]:
    """Deal n shares with threshold t; returns (shares, commitment).

    The commitment is [g^a0, ..., g^a_{t-1}] with a0 the secret.
    """
    if not 1 <= t <= n:
        raise InvalidThreshold(f"threshold {t} outside [1, {n}]")
    q = group.order
    coeffs = [secret % q] + [group.rand_scalar(rng) for _ in range(t - 1)]
    shares = [Share(j, _eval_poly(coeffs, j, q)) for j in range(1, n + 1)]
    commitment = [group.pow(group.g, a, counter) for a in coeffs]
    return shares, commitment


def _eval_poly(coeffs: Sequence[int], x: int, q: int) -> int:
    acc = 0
    for a in reversed(coeffs):
        acc = (acc * x + a) % q
    return acc


def lagrange_at_zero(q: int, indices: Sequence[int]) -> dict[int, int]:
    """Coefficients lam_j with f(0) = sum lam_j * f(j) over the index set."""
    if len(set(indices)) != len(indices):
        raise ShamirError("duplicate share indices")
    coeffs = {}
    for j in indices:
        num, den = 1, 1
        for k in indices:
            if k == j:
                continue
            num = (num * k) % q
            den = (den * (k - j)) % q
        coeffs[j] = (num * pow(den, q - 2, q)) % q
    return coeffs


def reconstruct(group: SchnorrGroup, shares: Iterable[Share], t: int) -> int:
    """Interpolate the secret from at least t consistent shares."""
    shares = list(shares)
    if len(shares) < t:
        raise NotEnoughShares(f"{len(shares)} shares for threshold {t}")
    q = group.order
    lam = lagrange_at_zero(q, [s.index for s in shares])
    return sum(s.value * lam[s.index] for s in shares) % q


def derive_share_commitment(
    group: SchnorrGroup,
    commitment: Sequence[int],
    index: int,
    counter: ExpCounter | None = None,
) -> int:
    """g^{f(index)} computed from the coefficient commitments alone."""
    q = group.order
    acc = group.identity
    power = 1
    for c in commitment:
        acc = group.mul(acc, group.pow(c, power, counter))
        power = (power * index) % q
    return acc


def verify_share(
    group: SchnorrGroup,
    commitment: Sequence[int],
    share: Share,
    counter: ExpCounter | None = None,
) -> bool:
    expected = derive_share_commitment(group, commitment, share.index, counter)
    return group.pow(group.g, share.value, counter) == expected


def interpolate_in_exponent(
    group: SchnorrGroup,
    points: Sequence[tuple[int, int]],
    t: int,
    counter: ExpCounter | None = None,
) -> int:
    """Given (index, h^{f(index)}) pairs, return h^{f(0)}.

    Runs the reconstruction in the exponent, so the shared values never
    appear in the clear.
    """
    if len(points) < t:
        raise NotEnoughShares(f"{len(points)} points for threshold {t}")
    lam = lagrange_at_zero(group.order, [j for j, _ in points])
    acc = group.identity
    for j, v in points:
        acc = group.mul(acc, group.pow(v, lam[j], counter))
    return acc
