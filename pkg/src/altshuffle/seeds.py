"""Deterministic RNG derivation.

Every randomized component draws from a random.Random seeded through this
module, so a single root seed fixes an entire run.  Child streams are
separated by string labels hashed into the seed; labels compose like paths
("party/3/keygen").
"""

from __future__ import annotations

import hashlib
import random


def child_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int, label: str | None = None) -> random.Random:
    if label is not None:
        seed = child_seed(seed, label)
    return random.Random(seed)
