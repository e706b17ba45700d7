"""Proofs the untrusted server and committee members exchange.

Two proof systems:

  * Batched partial decryption: a committee member holding key share sk_j
    proves that every partial decryption v_i = h_i^{sk_j} it returned is
    consistent with its public share commitment g^{sk_j}.  One commitment
    round, one challenge, one response scalar, regardless of batch size.

  * Shuffle correctness, by cut and choose: the shuffler publishes
    sigma_rep intermediate shuffles of the input and, per repetition, is
    challenged to open either the path input -> intermediate or the path
    intermediate -> output.  Each repetition a cheater survives with
    probability 1/2, so soundness error is 2^-sigma_rep.

Challenges come from hashing the transcript, so proofs verify offline.
Interactive entry points are also exposed for the decryption proof; the
hashed variant simply feeds the transcript digest in as the challenge.
"""

from __future__ import annotations

import hashlib
from typing import NamedTuple, Sequence

from .group import Ciphertext, ExpCounter, SchnorrGroup, reencrypt


def hash_transcript(label: str, parts: Sequence[bytes]) -> bytes:
    """Digest of length-prefixed parts; the label separates proof domains."""
    h = hashlib.sha256()
    h.update(label.encode())
    for part in parts:
        h.update(len(part).to_bytes(4, "little"))
        h.update(part)
    return h.digest()


def challenge_scalar(group: SchnorrGroup, label: str, parts: Sequence[bytes]) -> int:
    return int.from_bytes(hash_transcript(label, parts), "little") % group.order


def challenge_bits(label: str, parts: Sequence[bytes], nbits: int) -> list[int]:
    """Expand the transcript digest into nbits challenge bits."""
    out = []
    block = 0
    while len(out) < nbits:
        digest = hash_transcript(label, [*parts, block.to_bytes(4, "little")])
        for byte in digest:
            for k in range(8):
                out.append((byte >> k) & 1)
                if len(out) == nbits:
                    return out
        block += 1
    return out


def _encode_cts(group: SchnorrGroup, cts: Sequence[Ciphertext]) -> list[bytes]:
    out = []
    for ct in cts:
        out.append(group.encode_element(ct.c1))
        out.append(group.encode_element(ct.c2))
    return out


# -- batched partial decryption ----------------------------------------


class PartialDecProof(NamedTuple):
    values: tuple[int, ...]  # v_i = h_i^{sk share}
    commit_g: int            # g^r
    commit_h: tuple[int, ...]  # h_i^r
    response: int            # r + u * sk share


def pdec_commit(
    group: SchnorrGroup,
    sk_share: int,
    hs: Sequence[int],
    rng,
    counter: ExpCounter | None = None,
) -> tuple[int, tuple[int, ...], int, tuple[int, ...]]:
    """First move: partial decryptions plus commitments to fresh randomness.

    Returns (r, values, commit_g, commit_h); r is the prover's secret state.
    """
    r = group.rand_scalar(rng)
    values = tuple(group.pow(h, sk_share, counter) for h in hs)
    commit_g = group.pow(group.g, r, counter)
    commit_h = tuple(group.pow(h, r, counter) for h in hs)
    return r, values, commit_g, commit_h


def pdec_respond(group: SchnorrGroup, r: int, sk_share: int, u: int) -> int:
    return (r + u * sk_share) % group.order


def pdec_check(
    group: SchnorrGroup,
    share_commitment: int,
    hs: Sequence[int],
    values: Sequence[int],
    commit_g: int,
    commit_h: Sequence[int],
    u: int,
    e: int,
    counter: ExpCounter | None = None,
) -> bool:
    """Verify one member's batch against its public share commitment."""
    if len(values) != len(hs) or len(commit_h) != len(hs):
        return False
    if group.pow(group.g, e, counter) != group.mul(
        commit_g, group.pow(share_commitment, u, counter)
    ):
        return False
    for h, v, b in zip(hs, values, commit_h):
        if group.pow(h, e, counter) != group.mul(b, group.pow(v, u, counter)):
            return False
    return True


def _pdec_challenge(
    group: SchnorrGroup,
    share_commitment: int,
    hs: Sequence[int],
    values: Sequence[int],
    commit_g: int,
    commit_h: Sequence[int],
) -> int:
    enc = group.encode_element
    parts = [enc(share_commitment)]
    parts += [enc(h) for h in hs]
    parts += [enc(v) for v in values]
    parts.append(enc(commit_g))
    parts += [enc(b) for b in commit_h]
    return challenge_scalar(group, "partial-dec", parts)


def prove_partial_dec(
    group: SchnorrGroup,
    sk_share: int,
    share_commitment: int,
    hs: Sequence[int],
    rng,
    counter: ExpCounter | None = None,
) -> PartialDecProof:
    r, values, commit_g, commit_h = pdec_commit(group, sk_share, hs, rng, counter)
    u = _pdec_challenge(group, share_commitment, hs, values, commit_g, commit_h)
    e = pdec_respond(group, r, sk_share, u)
    return PartialDecProof(values, commit_g, commit_h, e)


def verify_partial_dec(
    group: SchnorrGroup,
    share_commitment: int,
    hs: Sequence[int],
    proof: PartialDecProof,
    counter: ExpCounter | None = None,
) -> bool:
    u = _pdec_challenge(
        group, share_commitment, hs, proof.values, proof.commit_g, proof.commit_h
    )
    return pdec_check(
        group,
        share_commitment,
        hs,
        proof.values,
        proof.commit_g,
        proof.commit_h,
        u,
        proof.response,
        counter,
    )


# -- shuffle proof ------------------------------------------------------
#
# The unit being shuffled is either a single ciphertext or a fixed-width
# tuple of ciphertexts (a payload that spans several chunks moves as one
# bundle).  Randomness then comes as one scalar, or one tuple of scalars,
# per list position.


def _norm_units(items):
    if not items or isinstance(items[0], Ciphertext):
        return [(ct,) for ct in items], True
    return [tuple(u) for u in items], False


def _norm_rands(rands, flat):
    if flat:
        return [(r,) for r in rands]
    return [tuple(r) for r in rands]


def _unit_reencrypt(group, pk, unit, runit, counter):
    return tuple(
        reencrypt(group, pk, ct, r, counter) for ct, r in zip(unit, runit)
    )


def _denorm_units(units, flat):
    return tuple(u[0] for u in units) if flat else tuple(units)


def _denorm_scalars(runits, flat):
    return tuple(r[0] for r in runits) if flat else tuple(tuple(r) for r in runits)


class ShuffleProof(NamedTuple):
    """Intermediate lists plus one opening per repetition.

    Each opening is (indices, scalars).  When the recomputed challenge bit
    is 0 it opens input -> intermediate: indices is the permutation rho and
    scalars the reblinding factors.  When the bit is 1 it opens
    intermediate -> output: indices maps each output position to its
    intermediate position, scalars carry the randomness difference.
    """

    intermediates: tuple
    openings: tuple


def apply_shuffle(
    group: SchnorrGroup,
    pk: int,
    cts: Sequence,
    perm: Sequence[int],
    rands: Sequence,
    counter: ExpCounter | None = None,
) -> list:
    """output[i] = rerandomization of cts[perm[i]] with rands[i]."""
    units, flat = _norm_units(list(cts))
    runits = _norm_rands(list(rands), flat)
    out = [
        _unit_reencrypt(group, pk, units[perm[i]], runits[i], counter)
        for i in range(len(units))
    ]
    return [u[0] for u in out] if flat else out


def _encode_units(group: SchnorrGroup, units) -> list[bytes]:
    out = []
    for unit in units:
        for ct in unit:
            out.append(group.encode_element(ct.c1))
            out.append(group.encode_element(ct.c2))
    return out


def _shuffle_challenge_bits(group, pk, in_units, out_units, intermediates):
    parts = [group.encode_element(pk)]
    parts += _encode_units(group, in_units)
    parts += _encode_units(group, out_units)
    for mid in intermediates:
        parts += _encode_units(group, mid)
    return challenge_bits("shuffle", parts, len(intermediates))


def _rand_unit(group, rng, width):
    return tuple(group.rand_scalar(rng) for _ in range(width))


def prove_shuffle(
    group: SchnorrGroup,
    pk: int,
    inputs: Sequence,
    outputs: Sequence,
    perm: Sequence[int],
    rands: Sequence,
    sigma_rep: int,
    rng,
    counter: ExpCounter | None = None,
) -> ShuffleProof:
    """Prove outputs is a reblinded permutation of inputs.

    The caller must have produced outputs via apply_shuffle(perm, rands).
    """
    in_units, flat = _norm_units(list(inputs))
    runits = _norm_rands(list(rands), flat)
    n = len(in_units)
    width = len(in_units[0]) if in_units else 1
    reps = []
    for _ in range(sigma_rep):
        rho = list(range(n))
        rng.shuffle(rho)
        s = [_rand_unit(group, rng, width) for _ in range(n)]
        mid = [
            _unit_reencrypt(group, pk, in_units[rho[i]], s[i], counter)
            for i in range(n)
        ]
        reps.append((rho, s, mid))
    out_units, _ = _norm_units(list(outputs))
    bits = _shuffle_challenge_bits(
        group, pk, in_units, out_units, [mid for _, _, mid in reps]
    )
    openings = []
    for bit, (rho, s, mid) in zip(bits, reps):
        if bit == 0:
            openings.append((tuple(rho), _denorm_scalars(s, flat)))
        else:
            # tau[i]: position in mid holding the same underlying input as
            # outputs[i]; the leftover randomness bridges mid to outputs.
            rho_inv = {inp: pos for pos, inp in enumerate(rho)}
            tau = [rho_inv[perm[i]] for i in range(n)]
            u = [
                tuple(
                    (runits[i][c] - s[tau[i]][c]) % group.order
                    for c in range(width)
                )
                for i in range(n)
            ]
            openings.append((tuple(tau), _denorm_scalars(u, flat)))
    return ShuffleProof(
        tuple(_denorm_units(mid, flat) for _, _, mid in reps), tuple(openings)
    )


def verify_shuffle(
    group: SchnorrGroup,
    pk: int,
    inputs: Sequence,
    outputs: Sequence,
    proof: ShuffleProof,
    sigma_rep: int,
    counter: ExpCounter | None = None,
) -> bool:
    in_units, _ = _norm_units(list(inputs))
    out_units, _ = _norm_units(list(outputs))
    n = len(in_units)
    width = len(in_units[0]) if in_units else 1
    if len(out_units) != n:
        return False
    if len(proof.intermediates) != sigma_rep or len(proof.openings) != sigma_rep:
        return False
    if any(len(u) != width for u in out_units):
        return False
    mids = [_norm_units(list(mid))[0] for mid in proof.intermediates]
    bits = _shuffle_challenge_bits(group, pk, in_units, out_units, mids)
    for bit, mid, (indices, scalars) in zip(bits, mids, proof.openings):
        if len(mid) != n or len(indices) != n or len(scalars) != n:
            return False
        if sorted(indices) != list(range(n)):
            return False
        runits = [u if isinstance(u, tuple) else (u,) for u in scalars]
        if any(len(u) != width or len(m) != width for u, m in zip(runits, mid)):
            return False
        if bit == 0:
            for i in range(n):
                if mid[i] != _unit_reencrypt(
                    group, pk, in_units[indices[i]], runits[i], counter
                ):
                    return False
        else:
            for i in range(n):
                if out_units[i] != _unit_reencrypt(
                    group, pk, mid[indices[i]], runits[i], counter
                ):
                    return False
    return True


def forge_shuffle_attempt(
    group: SchnorrGroup,
    pk: int,
    inputs: Sequence,
    outputs: Sequence,
    sigma_rep: int,
    rng,
) -> ShuffleProof:
    """Best cheating strategy when outputs is NOT a reblinding of inputs.

    Guess each challenge bit up front and build the intermediate so that
    the guessed side opens cleanly; the proof verifies only if every guess
    matches the hashed challenge, probability 2^-sigma_rep.
    """
    in_units, flat = _norm_units(list(inputs))
    out_units, _ = _norm_units(list(outputs))
    n = len(in_units)
    width = len(in_units[0]) if in_units else 1
    reps = []
    for _ in range(sigma_rep):
        guess = rng.randrange(2)
        rho = list(range(n))
        rng.shuffle(rho)
        s = [_rand_unit(group, rng, width) for _ in range(n)]
        base = in_units if guess == 0 else out_units
        mid = [
            _unit_reencrypt(group, pk, base[rho[i]], s[i], None)
            for i in range(n)
        ]
        reps.append((guess, rho, s, mid))
    openings = []
    for guess, rho, s, mid in reps:
        if guess == 0:
            openings.append((tuple(rho), _denorm_scalars(s, flat)))
        else:
            # mid[j] = reblind(outputs[rho[j]], s[j]); open mid -> outputs
            rho_inv = {out: pos for pos, out in enumerate(rho)}
            tau = [rho_inv[i] for i in range(n)]
            u = [
                tuple((-c) % group.order for c in s[tau[i]])
                for i in range(n)
            ]
            openings.append((tuple(tau), _denorm_scalars(u, flat)))
    return ShuffleProof(
        tuple(_denorm_units(mid, flat) for _, _, _, mid in reps), tuple(openings)
    )
