"""Committee key agreement and threshold decryption.

A chain of committees C_1 .. C_m, each of size n_dec with threshold t,
ends up holding shares of one key sk with public key pk = g^sk, without
any party ever seeing sk:

  * every member deals a sharing of a fresh secret to its own committee,
    and (except in the last committee) a second sharing of the same secret
    to the successor committee;
  * committee sums define s_i; each member of C_i (i >= 2) can publish a
    share of s_i - s_{i-1} without revealing anything about s_i itself;
  * the server reconstructs the differences, hence d_i = s_i - s_1, and
    every committee re-bases its shares by d_i so all of them share
    s_1 = sk.  pk is the product of C_1's published secret commitments.

Shares travel through the untrusted server under deterministic
authenticated encryption on pairwise DH keys.  Determinism is the fault
handle: a receiver who claims a bad share reveals the plaintext and the
pairwise key, the server re-encrypts and compares with the ciphertext it
relayed, and exactly one of reporter or dealer is exposed.

Decryption (per committee, over its slice of the batch) uses the batched
partial-decryption proof; any t valid responses reconstruct the
plaintexts in the exponent.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .group import Ciphertext, ExpCounter, SchnorrGroup
from .shamir import (
    Share,
    derive_share_commitment,
    interpolate_in_exponent,
    lagrange_at_zero,
    share_secret,
)
from .zk import PartialDecProof, verify_partial_dec


# -- deterministic authenticated encryption -----------------------------

TAG_BYTES = 32


class AEError(ValueError):
    pass


def pairwise_key(group: SchnorrGroup, my_sk: int, their_pk: int,
                 counter: ExpCounter | None = None) -> bytes:
    shared = group.pow(their_pk, my_sk, counter)
    return hashlib.sha256(b"pair" + group.encode_element(shared)).digest()


def share_nonce(sender_id: int, receiver_id: int, context: str) -> bytes:
    return hashlib.sha256(f"nonce/{sender_id}/{receiver_id}/{context}".encode()).digest()[:16]


def _keystream(key: bytes, nonce: bytes, n: int) -> bytes:
    out = b""
    ctr = 0
    while len(out) < n:
        out += hashlib.sha256(key + nonce + ctr.to_bytes(4, "little")).digest()
        ctr += 1
    return out[:n]


def ae_encrypt(key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
    """Deterministic: same (key, nonce, plaintext) gives the same blob.

    The tag binds the key itself, so revealing the key later commits the
    sender to this exact plaintext.
    """
    ct = bytes(a ^ b for a, b in zip(plaintext, _keystream(key, nonce, len(plaintext))))
    tag = hashlib.sha256(key + nonce + ct + b"mac").digest()
    return ct + tag


def ae_decrypt(key: bytes, nonce: bytes, blob: bytes) -> bytes:
    if len(blob) < TAG_BYTES:
        raise AEError("blob too short")
    ct, tag = blob[:-TAG_BYTES], blob[-TAG_BYTES:]
    if hashlib.sha256(key + nonce + ct + b"mac").digest() != tag:
        raise AEError("tag mismatch")
    return bytes(a ^ b for a, b in zip(ct, _keystream(key, nonce, len(ct))))


# -- messages (python-side shapes; wire encoding lives with the sim) ----


@dataclass
class SharingMsg:
    """One dealt sharing: blobs for each recipient position, in ascending
    position order (the dealer's own slot omitted for its own committee),
    plus the public coefficient commitments."""

    recipient_positions: list[int]
    blobs: list[bytes]
    commitment: list[int]


@dataclass
class FaultReport:
    scope: int          # 0 = own committee dealing, 1 = predecessor dealing
    dealer_pos: int
    claimed_plain: bytes
    revealed_key: bytes


# -- member ------------------------------------------------------------


SHARE_CONTEXT_OWN = "deal-own"
SHARE_CONTEXT_SUCC = "deal-succ"


@dataclass
class Member:
    group: SchnorrGroup
    client_id: int
    committee: int            # 1-based committee index
    pos: int                  # 1-based slot inside the committee
    rng: object
    counter: ExpCounter = field(default_factory=ExpCounter)

    def __post_init__(self) -> None:
        self.dh_sk = self.group.rand_scalar(self.rng)
        self.dh_pk = self.group.pow(self.group.g, self.dh_sk, self.counter)
        self.roster_own: list[tuple[int, int]] = []
        self.roster_succ: list[tuple[int, int]] = []
        self.roster_pred: list[tuple[int, int]] = []
        self.self_share = 0
        self.received_own: dict[int, int] = {}
        self.received_pred: dict[int, int] = {}
        self.s_tilde: Optional[int] = None
        self.offset: Optional[int] = None
        self.sk_share: Optional[int] = None

    def _key_for(self, peer: tuple[int, int]) -> bytes:
        peer_id, peer_pk = peer
        return pairwise_key(self.group, self.dh_sk, peer_pk, self.counter)

    def deal(
        self,
        roster_own: list[tuple[int, int]],
        roster_pred: list[tuple[int, int]],
        roster_succ: list[tuple[int, int]],
        threshold: int,
        cheat_recipient: int | None = None,
    ) -> tuple[SharingMsg, Optional[SharingMsg]]:
        """First move: share a fresh secret to own committee, and to the
        successor committee when there is one.

        cheat_recipient corrupts the share sent to that slot of the own
        committee (off-by-one in the value, properly encrypted).
        """
        self.roster_own = roster_own
        self.roster_pred = roster_pred
        self.roster_succ = roster_succ
        g = self.group
        secret = g.rand_scalar(self.rng)
        n_dec = len(roster_own)

        def encrypt_to(roster, shares, context, skip_pos=None):
            positions, blobs = [], []
            for share in shares:
                if share.index == skip_pos:
                    continue
                value = share.value
                if context == SHARE_CONTEXT_OWN and share.index == cheat_recipient:
                    value = (value + 1) % g.order
                peer = roster[share.index - 1]
                nonce = share_nonce(self.client_id, peer[0], context)
                blob = ae_encrypt(self._key_for(peer), nonce, g.encode_scalar(value))
                positions.append(share.index)
                blobs.append(blob)
            return positions, blobs

        own_shares, own_com = share_secret(g, secret, n_dec, threshold, self.rng, self.counter)
        self.self_share = own_shares[self.pos - 1].value
        pos_own, blobs_own = encrypt_to(roster_own, own_shares, SHARE_CONTEXT_OWN, self.pos)
        own_msg = SharingMsg(pos_own, blobs_own, own_com)

        succ_msg = None
        if roster_succ:
            succ_shares, succ_com = share_secret(
                g, secret, len(roster_succ), threshold, self.rng, self.counter
            )
            pos_s, blobs_s = encrypt_to(roster_succ, succ_shares, SHARE_CONTEXT_SUCC)
            succ_msg = SharingMsg(pos_s, blobs_s, succ_com)
        return own_msg, succ_msg

    def receive_shares(
        self,
        own_items: list[tuple[int, bytes, list[int]]],
        pred_items: list[tuple[int, bytes, list[int]]],
    ) -> list[FaultReport]:
        """Decrypt and verify relayed shares; return reports for any that
        fail.  Items are (dealer_pos, blob, dealer_commitment)."""
        reports = []
        for scope, items, roster, context in (
            (0, own_items, self.roster_own, SHARE_CONTEXT_OWN),
            (1, pred_items, self.roster_pred, SHARE_CONTEXT_SUCC),
        ):
            store = self.received_own if scope == 0 else self.received_pred
            for dealer_pos, blob, com in items:
                peer = roster[dealer_pos - 1]
                key = pairwise_key(self.group, self.dh_sk, peer[1], self.counter)
                nonce = share_nonce(peer[0], self.client_id, context)
                try:
                    plain = ae_decrypt(key, nonce, blob)
                    value = self.group.decode_scalar(plain)
                except ValueError:
                    reports.append(FaultReport(scope, dealer_pos, b"\x00" * 32, key))
                    continue
                expected = derive_share_commitment(self.group, com, self.pos, self.counter)
                if self.group.pow(self.group.g, value, self.counter) != expected:
                    reports.append(FaultReport(scope, dealer_pos, plain, key))
                    continue
                store[dealer_pos] = value
        return reports

    def accept_dealers(self, dealers_own: list[int], dealers_pred: list[int]) -> Optional[int]:
        """Aggregate over the agreed dealer sets; returns the published
        offset share, or None for a first committee."""
        q = self.group.order
        total = 0
        for pos in dealers_own:
            total = (total + (self.self_share if pos == self.pos else self.received_own[pos])) % q
        self.s_tilde = total
        if self.committee == 1:
            self.offset = None
            return None
        pred_sum = 0
        for pos in dealers_pred:
            pred_sum = (pred_sum + self.received_pred[pos]) % q
        self.offset = (self.s_tilde - pred_sum) % q
        return self.offset

    def finalize(self, d_i: int) -> int:
        self.sk_share = (self.s_tilde - d_i) % self.group.order
        return self.sk_share

    def partial_decrypt(self, cts: Sequence[Ciphertext]) -> PartialDecProof:
        from .zk import prove_partial_dec

        share_com = self.group.pow(self.group.g, self.sk_share, self.counter)
        hs = [ct.c2 for ct in cts]
        return prove_partial_dec(
            self.group, self.sk_share, share_com, hs, self.rng, self.counter
        )


# -- server-side bookkeeping -------------------------------------------


@dataclass
class StoredSharing:
    dealer_pos: int
    positions: list[int]
    blobs: dict[int, bytes]   # recipient position -> blob, verbatim
    commitment: list[int]


class KeyAgreementServer:
    """Holds relayed ciphertexts and commitments, adjudicates faults,
    validates offsets, and derives pk plus every share commitment."""

    def __init__(self, group: SchnorrGroup, m: int, n_dec: int, t: int,
                 counter: ExpCounter | None = None) -> None:
        self.group = group
        self.m = m
        self.n_dec = n_dec
        self.t = t
        self.counter = counter if counter is not None else ExpCounter()
        # sharings[i][pos] for committee i (1-based), scope "own"/"succ"
        self.own_sharings: dict[int, dict[int, StoredSharing]] = {i: {} for i in range(1, m + 1)}
        self.succ_sharings: dict[int, dict[int, StoredSharing]] = {i: {} for i in range(1, m + 1)}
        self.rosters: dict[int, list[tuple[int, int]]] = {}
        self.dropped: set[int] = set()            # client ids
        self.dealers_own: dict[int, list[int]] = {}
        self.dealers_pred: dict[int, list[int]] = {}
        self.deltas: dict[int, int] = {}
        self.d: dict[int, int] = {}
        self.pk: Optional[int] = None
        self.share_commitments: dict[int, dict[int, int]] = {}
        self.events: list[dict] = []

    def store_dealing(self, committee: int, dealer_pos: int,
                      own_msg: SharingMsg, succ_msg: Optional[SharingMsg]) -> None:
        self.own_sharings[committee][dealer_pos] = StoredSharing(
            dealer_pos, own_msg.recipient_positions,
            dict(zip(own_msg.recipient_positions, own_msg.blobs)), own_msg.commitment,
        )
        if succ_msg is not None:
            self.succ_sharings[committee][dealer_pos] = StoredSharing(
                dealer_pos, succ_msg.recipient_positions,
                dict(zip(succ_msg.recipient_positions, succ_msg.blobs)), succ_msg.commitment,
            )

    def relay_for(self, committee: int, pos: int):
        """Shares and commitments addressed to one member: from its own
        committee's dealings and from the predecessor's successor-dealings."""
        own = [
            (s.dealer_pos, s.blobs[pos], s.commitment)
            for _, s in sorted(self.own_sharings[committee].items())
            if pos in s.blobs
        ]
        pred = []
        if committee >= 2:
            pred = [
                (s.dealer_pos, s.blobs[pos], s.commitment)
                for _, s in sorted(self.succ_sharings[committee - 1].items())
                if pos in s.blobs
            ]
        return own, pred

    def adjudicate(self, committee: int, reporter_pos: int,
                   reports: list[FaultReport]) -> None:
        """Each report drops exactly one of dealer or reporter.

        The revealed key re-encrypts the claimed plaintext; a mismatch with
        the stored blob means the reporter is lying about what it got.
        """
        roster = self.rosters[committee]
        reporter_id = roster[reporter_pos - 1][0]
        for rep in reports:
            if rep.scope == 0:
                stored = self.own_sharings[committee].get(rep.dealer_pos)
                dealer_committee = committee
                context = SHARE_CONTEXT_OWN
            else:
                stored = self.succ_sharings.get(committee - 1, {}).get(rep.dealer_pos)
                dealer_committee = committee - 1
                context = SHARE_CONTEXT_SUCC
            if stored is None or reporter_pos not in stored.blobs:
                self._drop(reporter_id, "report-names-unknown-dealer")
                continue
            dealer_id = self.rosters[dealer_committee][rep.dealer_pos - 1][0]
            nonce = share_nonce(dealer_id, reporter_id, context)
            reenc = ae_encrypt(rep.revealed_key, nonce, rep.claimed_plain)
            if reenc != stored.blobs[reporter_pos]:
                self._drop(reporter_id, "report-contradicts-ciphertext")
                continue
            try:
                value = self.group.decode_scalar(rep.claimed_plain)
            except ValueError:
                self._drop(dealer_id, "share-not-a-scalar")
                continue
            expected = derive_share_commitment(
                self.group, stored.commitment, reporter_pos, self.counter
            )
            if self.group.pow(self.group.g, value, self.counter) != expected:
                self._drop(dealer_id, "share-off-commitment")
            else:
                self._drop(reporter_id, "report-unfounded")

    def _drop(self, client_id: int, reason: str) -> None:
        if client_id not in self.dropped:
            self.dropped.add(client_id)
            self.events.append({"event": "drop", "client": client_id, "reason": reason})

    def drop_silent(self, client_id: int, reason: str = "silent") -> None:
        self._drop(client_id, reason)

    def agree_dealers(self) -> None:
        """A dealer counts only if it dealt in round 1 and was never
        dropped; dropping removes both of its sharings."""
        for i in range(1, self.m + 1):
            roster = self.rosters[i]
            ok = []
            for pos in sorted(self.own_sharings[i]):
                cid = roster[pos - 1][0]
                if cid in self.dropped:
                    continue
                if i < self.m and pos not in self.succ_sharings[i]:
                    continue  # must have dealt both sharings
                ok.append(pos)
            self.dealers_own[i] = ok
        for i in range(1, self.m + 1):
            self.dealers_pred[i] = [] if i == 1 else list(self.dealers_own[i - 1])

    def expected_offset_commitment(self, committee: int, pos: int) -> int:
        """g^{offset} predicted from dealer commitments alone."""
        g = self.group
        num = g.identity
        for dp in self.dealers_own[committee]:
            com = self.own_sharings[committee][dp].commitment
            num = g.mul(num, derive_share_commitment(g, com, pos, self.counter))
        den = g.identity
        for dp in self.dealers_pred[committee]:
            com = self.succ_sharings[committee - 1][dp].commitment
            den = g.mul(den, derive_share_commitment(g, com, pos, self.counter))
        return g.mul(num, g.inv(den))

    def take_offsets(self, committee: int, offsets: dict[int, int]) -> bool:
        """Validate published offsets and reconstruct s_i - s_{i-1} from
        any t valid ones.  Returns False if fewer than t check out."""
        g = self.group
        valid: list[Share] = []
        for pos in sorted(offsets):
            expect = self.expected_offset_commitment(committee, pos)
            if g.pow(g.g, offsets[pos], self.counter) == expect:
                valid.append(Share(pos, offsets[pos]))
            else:
                self.events.append(
                    {"event": "bad-offset", "committee": committee, "pos": pos}
                )
        if len(valid) < self.t:
            return False
        chosen = valid[: self.t]
        lam = lagrange_at_zero(g.order, [s.index for s in chosen])
        self.deltas[committee] = sum(s.value * lam[s.index] for s in chosen) % g.order
        return True

    def finish_key(self) -> int:
        """d_i per committee, pk, and every member's share commitment."""
        g = self.group
        acc = 0
        self.d[1] = 0
        for i in range(2, self.m + 1):
            acc = (acc + self.deltas[i]) % g.order
            self.d[i] = acc
        pk = g.identity
        for dp in self.dealers_own[1]:
            pk = g.mul(pk, self.own_sharings[1][dp].commitment[0])
        self.pk = pk
        for i in range(1, self.m + 1):
            coms = {}
            shift = g.inv(g.pow(g.g, self.d[i], self.counter))
            for pos in range(1, self.n_dec + 1):
                acc_el = g.identity
                for dp in self.dealers_own[i]:
                    com = self.own_sharings[i][dp].commitment
                    acc_el = g.mul(
                        acc_el, derive_share_commitment(g, com, pos, self.counter)
                    )
                coms[pos] = g.mul(acc_el, shift)
            self.share_commitments[i] = coms
        return pk


def combine_partial_decryptions(
    group: SchnorrGroup,
    cts: Sequence[Ciphertext],
    proofs: dict[int, PartialDecProof],
    share_commitments: dict[int, int],
    t: int,
    counter: ExpCounter | None = None,
) -> Optional[list[int]]:
    """Verify each member's batch proof and decrypt with the first t
    valid responses; None if fewer than t verify."""
    hs = [ct.c2 for ct in cts]
    valid = []
    for pos in sorted(proofs):
        if verify_partial_dec(group, share_commitments[pos], hs, proofs[pos], counter):
            valid.append(pos)
        if len(valid) == t:
            break
    if len(valid) < t:
        return None
    lam = lagrange_at_zero(group.order, valid)
    out = []
    for i, ct in enumerate(cts):
        acc = group.identity
        for pos in valid:
            acc = group.mul(acc, group.pow(proofs[pos].values[i], lam[pos], counter))
        out.append(group.mul(ct.c1, group.inv(acc)))
    return out
