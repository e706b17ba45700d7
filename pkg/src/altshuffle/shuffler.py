"""The grid shuffle as a pure function, plus exact distribution tools.

The mixing pattern both protocols realize: arrange n = h * w items in an
h x w grid, then repeat ell times (shuffle every row independently and
uniformly, transpose).  One iteration with a single row is an ordinary
uniform shuffle; more iterations on a proper grid trade perfect
uniformity for parallelism.

enumerate_distribution computes the exact output distribution by dynamic
programming over arrangements, with rational weights, so tests can
compare empirical behavior against truth and check how total variation
distance to uniform falls with ell.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Optional, Sequence


def _check_dims(n: int, h: int, w: int) -> None:
    if h < 1 or w < 1 or h * w != n:
        raise ValueError(f"grid {h}x{w} does not hold {n} items")


def grid_shuffle(
    items: Sequence,
    h: int,
    w: int,
    ell: int,
    rng,
    public_perm: Optional[Sequence[int]] = None,
) -> list:
    """Run ell iterations of (row shuffles, transpose) and flatten.

    public_perm, when given, arranges items into the grid first; it models
    an arrangement chosen openly, so it adds no hiding on its own.
    """
    n = len(items)
    _check_dims(n, h, w)
    if public_perm is not None:
        items = [items[p] for p in public_perm]
    grid = [list(items[r * w : (r + 1) * w]) for r in range(h)]
    for _ in range(ell):
        for row in grid:
            rng.shuffle(row)
        grid = [list(col) for col in zip(*grid)]
        h, w = w, h
    return [x for row in grid for x in row]


def grid_permutation(n: int, h: int, w: int, ell: int, rng) -> list[int]:
    """Sample the composite permutation: out[j] = index of the input that
    lands in output slot j."""
    return grid_shuffle(list(range(n)), h, w, ell, rng)


def enumerate_distribution(
    n: int, h: int, w: int, ell: int
) -> dict[tuple[int, ...], Fraction]:
    """Exact output distribution over arrangements of range(n).

    Keys are tuples out with out[j] the input index at output slot j.
    """
    _check_dims(n, h, w)
    dist: dict[tuple[int, ...], Fraction] = {tuple(range(n)): Fraction(1)}
    for _ in range(ell):
        row_choices = list(itertools.permutations(range(w)))
        weight = Fraction(1, len(row_choices) ** h)
        nxt: dict[tuple[int, ...], Fraction] = {}
        for arr, p in dist.items():
            rows = [arr[r * w : (r + 1) * w] for r in range(h)]
            for combo in itertools.product(row_choices, repeat=h):
                shuffled = [
                    [rows[r][combo[r][c]] for c in range(w)] for r in range(h)
                ]
                transposed = tuple(
                    shuffled[r][c] for c in range(w) for r in range(h)
                )
                nxt[transposed] = nxt.get(transposed, Fraction(0)) + p * weight
        dist = nxt
        h, w = w, h
    return dist


def support_size(n: int, h: int, w: int, ell: int) -> int:
    return len(enumerate_distribution(n, h, w, ell))


def tvd_to_uniform(dist: dict[tuple[int, ...], Fraction], n: int) -> Fraction:
    """Total variation distance to the uniform distribution on S_n."""
    uniform = Fraction(1, math.factorial(n))
    covered = Fraction(0)
    acc = Fraction(0)
    for p in dist.values():
        acc += abs(p - uniform)
        covered += uniform
    acc += math.factorial(n) * uniform - covered  # mass on unreached perms
    return acc / 2


def empirical_tvd(
    counts: dict[tuple[int, ...], int],
    total: int,
    dist: dict[tuple[int, ...], Fraction],
) -> float:
    """TVD between an empirical sample and an exact distribution."""
    acc = 0.0
    seen = set(counts)
    for arr, c in counts.items():
        acc += abs(c / total - float(dist.get(arr, 0)))
    for arr, p in dist.items():
        if arr not in seen:
            acc += float(p)
    return acc / 2
