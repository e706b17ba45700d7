"""Round-driven simulation of the shuffling protocols on a star network.

Every message crosses the untrusted server; clients never talk to each
other directly.  A round is one exchange wave: the server sends to some
set of parties and waits for their responses.  Parties that have gone
silent, or whose responses arrive malformed or late, contribute nothing
to protocol logic but their traffic still lands in the transcript, and
byte counts obey sent = received + discarded.

The two full protocols share the same key agreement and decryption
phases and differ in the shuffling middle:

  * amortized: clients encrypt under a server-offset key, one chain of
    sequential shuffles over the whole batch, early exit once
    n_shufflers - dropout_allowance shuffles verified;
  * alternating: clients encrypt under the committee key, the server
    arranges the batch in a public grid and alternates row shuffles with
    transposes for a set number of iterations.

Results report the decrypted multiset, or "bottom" when too many clients
vanished before submitting ciphertexts, or "abort" when a committee or
the shuffle chain failed beyond its allowance.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from .committee import (
    FaultReport,
    KeyAgreementServer,
    Member,
    combine_partial_decryptions,
    pairwise_key,
)
from .group import GROUPS, Ciphertext, ExpCounter, encrypt, shift_key
from .seeds import make_rng
from .wire import ENVELOPE_BYTES, Reader, Writer
from .zk import apply_shuffle, forge_shuffle_attempt, prove_shuffle, verify_shuffle

SERVER = "S"


class ConfigError(ValueError):
    pass


@dataclass
class ProtocolConfig:
    protocol: str = "amortized"
    group: str = "tiny31"
    n_clients: int = 16
    n_committees: int = 2
    committee_size: int = 4
    threshold: int = 3
    n_shufflers: int = 4
    dropout_allowance: int = 1
    sigma_rep: int = 4
    alpha: float = 0.25
    payload_bytes: int = 0          # 0 means the group's full capacity
    grid_h: int = 0                 # alternating only
    grid_w: int = 0
    iterations: int = 1
    n_shuffle_committees: int = 0   # 0 picks min(n_clients // n_shufflers, max(h, w))

    def validate(self) -> None:
        g = GROUPS.get(self.group)
        if g is None:
            raise ConfigError(f"unknown group {self.group!r}")
        if self.protocol not in ("amortized", "alternating"):
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if not 1 <= self.threshold <= self.committee_size:
            raise ConfigError("violated: 1 <= threshold <= committee_size")
        if self.n_committees * self.committee_size > self.n_clients:
            raise ConfigError("violated: n_committees * committee_size <= n_clients")
        if self.n_committees < 1:
            raise ConfigError("violated: n_committees >= 1")
        if not 1 <= self.n_shufflers <= self.n_clients:
            raise ConfigError("violated: 1 <= n_shufflers <= n_clients")
        if not 0 <= self.dropout_allowance < self.n_shufflers:
            raise ConfigError("violated: 0 <= dropout_allowance < n_shufflers")
        if self.sigma_rep < 1:
            raise ConfigError("violated: sigma_rep >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("violated: 0 <= alpha <= 1")
        if self.payload_bytes < 0 or self.payload_bytes > g.payload_capacity:
            raise ConfigError("violated: 0 <= payload_bytes <= group payload capacity")
        if self.protocol == "alternating":
            if self.grid_h < 1 or self.grid_w < 1:
                raise ConfigError("violated: grid_h >= 1 and grid_w >= 1")
            if self.grid_h * self.grid_w != self.n_clients:
                raise ConfigError("violated: grid_h * grid_w == n_clients")
            if self.iterations < 1:
                raise ConfigError("violated: iterations >= 1")

    @property
    def payload_size(self) -> int:
        return self.payload_bytes or GROUPS[self.group].payload_capacity


@dataclass
class AdversarySpec:
    bad_share: dict[int, int] = field(default_factory=dict)   # dealer -> slot
    bad_offset: list[int] = field(default_factory=list)
    bad_partial_dec: list[int] = field(default_factory=list)
    bad_shuffle: list[int] = field(default_factory=list)
    false_report: list[int] = field(default_factory=list)     # lie about a received share
    unfounded_report: list[int] = field(default_factory=list)  # accuse despite a valid share
    substitute_input: dict[int, str] = field(default_factory=dict)  # hex payloads
    go_silent: dict[int, int] = field(default_factory=dict)   # client -> round
    send_malformed: dict[int, list[int]] = field(default_factory=dict)
    send_late: dict[int, list[int]] = field(default_factory=dict)


@dataclass
class DropoutSchedule:
    silent_from: dict[int, int] = field(default_factory=dict)  # client -> round


@dataclass
class RoundMessage:
    round: int
    label: str
    sender: str
    receiver: str
    kind: str
    size: int
    payload_hex: str
    malformed: bool = False
    late: bool = False
    accepted: bool = True


@dataclass
class SimResult:
    status: str                       # "ok" | "bottom" | "abort"
    outputs: Optional[list[str]]      # hex payloads, decryption order
    rounds: int
    pk: Optional[str]
    dropped: list[int]
    missing_inputs: int
    padded: int
    bytes_sent: dict[str, int]
    bytes_received: dict[str, int]
    discarded_bytes: int
    exps: dict[str, int]
    events: list[dict]
    transcript: list[RoundMessage]

    def output_multiset(self) -> Optional[dict[str, int]]:
        if self.outputs is None:
            return None
        counts: dict[str, int] = {}
        for o in self.outputs:
            counts[o] = counts.get(o, 0) + 1
        return counts

    def total_bytes(self) -> int:
        return sum(self.bytes_sent.values())

    def summary_dict(self) -> dict:
        return {
            "status": self.status,
            "outputs": self.outputs,
            "rounds": self.rounds,
            "pk": self.pk,
            "dropped": self.dropped,
            "missing_inputs": self.missing_inputs,
            "padded": self.padded,
            "bytes_sent": dict(sorted(self.bytes_sent.items())),
            "bytes_received": dict(sorted(self.bytes_received.items())),
            "discarded_bytes": self.discarded_bytes,
            "total_bytes": self.total_bytes(),
            "exps": dict(sorted(self.exps.items())),
            "events": self.events,
        }

    def write_transcript(self, path: str) -> None:
        with open(path, "w") as fh:
            for msg in self.transcript:
                fh.write(json.dumps(asdict(msg), sort_keys=True) + "\n")


class Network:
    """Transport accounting: transcript, byte conservation, liveness."""

    def __init__(self, silent_from: dict[int, int], adv: AdversarySpec) -> None:
        self.silent_from = dict(silent_from)
        for cid, rnd in adv.go_silent.items():
            prev = self.silent_from.get(cid)
            self.silent_from[cid] = rnd if prev is None else min(prev, rnd)
        self.adv = adv
        self.round = 0
        self.label = ""
        self.transcript: list[RoundMessage] = []
        self.bytes_sent: dict[str, int] = {}
        self.bytes_received: dict[str, int] = {}
        self.discarded = 0

    def begin_round(self, label: str) -> int:
        self.round += 1
        self.label = label
        return self.round

    def responds(self, cid: int) -> bool:
        silent = self.silent_from.get(cid)
        return silent is None or self.round < silent

    def flags(self, cid: int) -> tuple[bool, bool]:
        malformed = self.round in self.adv.send_malformed.get(cid, ())
        late = self.round in self.adv.send_late.get(cid, ())
        return malformed, late

    def send(
        self,
        sender: str,
        receiver: str,
        kind: str,
        payload: bytes,
        receiver_live: bool = True,
        malformed: bool = False,
        late: bool = False,
    ) -> bool:
        size = len(payload) + ENVELOPE_BYTES
        accepted = receiver_live and not malformed and not late
        self.bytes_sent[sender] = self.bytes_sent.get(sender, 0) + size
        if accepted:
            self.bytes_received[receiver] = self.bytes_received.get(receiver, 0) + size
        else:
            self.discarded += size
        self.transcript.append(
            RoundMessage(
                self.round, self.label, sender, receiver, kind, size,
                payload.hex(), malformed, late, accepted,
            )
        )
        return accepted


def default_input(seed: int, cid: int, nbytes: int) -> bytes:
    digest = hashlib.sha256(f"input/{seed}/{cid}".encode()).digest()
    while len(digest) < nbytes:
        digest += hashlib.sha256(digest).digest()
    return digest[:nbytes]


# -- payload builders ---------------------------------------------------


def _enc_roster(group, committee, pos, t, own, pred, succ) -> bytes:
    w = Writer(group).u32(committee).u32(pos).u32(t)
    for roster in (own, pred, succ):
        w.u32_list([cid for cid, _ in roster])
        w.element_list([pk for _, pk in roster])
    return w.done()


def _enc_dealing(group, own_msg, succ_msg) -> bytes:
    w = Writer(group)
    w.u32_list(own_msg.recipient_positions)
    w.raw_list(own_msg.blobs)
    w.element_list(own_msg.commitment)
    w.u32(1 if succ_msg else 0)
    if succ_msg:
        w.u32_list(succ_msg.recipient_positions)
        w.raw_list(succ_msg.blobs)
        w.element_list(succ_msg.commitment)
    return w.done()


def _enc_relay(group, own_items, pred_items) -> bytes:
    w = Writer(group)
    for items in (own_items, pred_items):
        w.u32_list([pos for pos, _, _ in items])
        w.raw_list([blob for _, blob, _ in items])
        flat = [el for _, _, com in items for el in com]
        w.element_list(flat)
    return w.done()


def _enc_faults(group, reports) -> bytes:
    w = Writer(group).u32(len(reports))
    for r in reports:
        w.u32(r.scope).u32(r.dealer_pos).raw(r.claimed_plain).raw(r.revealed_key)
    return w.done()


def _enc_adjudication(group, dropped, dealers_own, dealers_pred) -> bytes:
    return (
        Writer(group)
        .u32_list(sorted(dropped))
        .u32_list(dealers_own)
        .u32_list(dealers_pred)
        .done()
    )


def _enc_offset(group, offset) -> bytes:
    w = Writer(group)
    if offset is None:
        return w.u32(0).done()
    return w.u32(1).scalar(offset).done()


def _enc_publish(group, pk, pk_enc, d_i, payload_bytes) -> bytes:
    w = Writer(group).element(pk).element(pk_enc).u32(payload_bytes)
    if d_i is None:
        return w.u32(0).done()
    return w.u32(1).scalar(d_i).done()


def _enc_ct_bundles(group, bundles) -> bytes:
    return Writer(group).ciphertext_list([ct for b in bundles for ct in b]).done()


def _enc_shuffle_req(group, pk_enc, bundles) -> bytes:
    w = Writer(group).element(pk_enc)
    w.ciphertext_list([ct for b in bundles for ct in b])
    return w.done()


def _enc_shuffle_resp(group, bundles, proof) -> bytes:
    w = Writer(group)
    w.ciphertext_list([ct for b in bundles for ct in b])
    w.u32(len(proof.intermediates))
    for mid in proof.intermediates:
        units = mid if (mid and isinstance(mid[0], tuple)) else [(ct,) for ct in mid]
        w.ciphertext_list([ct for u in units for ct in u])
    for indices, scalars in proof.openings:
        w.u32_list(list(indices))
        flat = []
        for s in scalars:
            flat.extend(s if isinstance(s, tuple) else (s,))
        w.scalar_list(flat)
    return w.done()


def _enc_partial_dec(group, proof) -> bytes:
    return (
        Writer(group)
        .element_list(list(proof.values))
        .element(proof.commit_g)
        .element_list(list(proof.commit_h))
        .scalar(proof.response)
        .done()
    )


def decode_ct_list(group, payload: bytes) -> list[Ciphertext]:
    r = Reader(group, payload)
    cts = r.ciphertext_list()
    r.expect_end()
    return cts


# -- the run ------------------------------------------------------------


class _Run:
    def __init__(self, cfg: ProtocolConfig, adv: AdversarySpec,
                 drops: DropoutSchedule, seed: int,
                 inputs: Optional[list[bytes]] = None) -> None:
        cfg.validate()
        self.cfg = cfg
        self.adv = adv
        self.seed = seed
        self.group = GROUPS[cfg.group]
        self.net = Network(drops.silent_from, adv)
        self.server_rng = make_rng(seed, "server")
        self.server_counter = ExpCounter()
        self.counters: dict[int, ExpCounter] = {}
        self.rngs = {}
        for cid in range(cfg.n_clients):
            self.rngs[cid] = make_rng(seed, f"client/{cid}")
            self.counters[cid] = ExpCounter()
        self.events: list[dict] = []
        self.width = self.group.elements_per_payload
        if inputs is None:
            inputs = [
                default_input(seed, cid, cfg.payload_size)
                for cid in range(cfg.n_clients)
            ]
        self.inputs = inputs
        # committee layout: first m * n_dec clients, in slabs
        self.members: dict[int, Member] = {}
        self.committee_of: dict[int, tuple[int, int]] = {}
        for i in range(1, cfg.n_committees + 1):
            base = (i - 1) * cfg.committee_size
            for j in range(1, cfg.committee_size + 1):
                cid = base + j - 1
                self.committee_of[cid] = (i, j)
                self.members[cid] = Member(
                    self.group, cid, i, j, self.rngs[cid], self.counters[cid]
                )
        self.ka = KeyAgreementServer(
            self.group, cfg.n_committees, cfg.committee_size, cfg.threshold,
            self.server_counter,
        )
        for i in range(1, cfg.n_committees + 1):
            base = (i - 1) * cfg.committee_size
            self.ka.rosters[i] = [
                (cid, self.members[cid].dh_pk)
                for cid in range(base, base + cfg.committee_size)
            ]
        self.pk: Optional[int] = None
        self.pk_enc: Optional[int] = None
        self.sk_offset = 0   # the server-held key offset, when the protocol uses one
        self.padded = 0
        self.missing_inputs = 0

    # helpers

    def roster_for(self, i: int) -> list[tuple[int, int]]:
        return self.ka.rosters.get(i, [])

    def live_members(self, i: int) -> list[int]:
        return [
            cid for cid, _ in self.ka.rosters[i]
            if cid not in self.ka.dropped
        ]

    def _result(self, status, outputs=None) -> SimResult:
        return SimResult(
            status=status,
            outputs=[o.hex() if o is not None else None for o in outputs]
            if outputs is not None else None,
            rounds=self.net.round,
            pk=self.group.encode_element(self.pk).hex() if self.pk else None,
            dropped=sorted(self.ka.dropped),
            missing_inputs=self.missing_inputs,
            padded=self.padded,
            bytes_sent=self.net.bytes_sent,
            bytes_received=self.net.bytes_received,
            discarded_bytes=self.net.discarded,
            exps={
                **{str(cid): c.count for cid, c in self.counters.items()},
                SERVER: self.server_counter.count,
            },
            events=self.ka.events + self.events,
            transcript=self.net.transcript,
        )

    def _client_send(self, cid: int, kind: str, payload: bytes) -> bool:
        malformed, late = self.net.flags(cid)
        return self.net.send(
            str(cid), SERVER, kind, payload, malformed=malformed, late=late
        )

    def _fabricated_reports(self, member: Member) -> list[FaultReport]:
        """Malicious accusations against the lowest-position dealer whose
        share actually verified."""
        g = self.group
        cid = member.client_id
        out = []
        lie = cid in self.adv.false_report
        unfounded = cid in self.adv.unfounded_report
        if not (lie or unfounded) or not member.received_own:
            return out
        target = min(member.received_own)
        peer = member.roster_own[target - 1]
        key = pairwise_key(g, member.dh_sk, peer[1], member.counter)
        value = member.received_own[target]
        if lie:
            out.append(FaultReport(0, target, g.encode_scalar((value + 1) % g.order), key))
        else:
            out.append(FaultReport(0, target, g.encode_scalar(value), key))
        return out

    # key agreement rounds

    def run_key_agreement(self) -> Optional[str]:
        cfg, g, net = self.cfg, self.group, self.net

        net.begin_round("ka1")
        dealings: dict[int, tuple] = {}
        for cid, member in self.members.items():
            i = member.committee
            own = self.roster_for(i)
            pred = self.roster_for(i - 1)
            succ = self.roster_for(i + 1)
            payload = _enc_roster(g, i, member.pos, cfg.threshold, own, pred, succ)
            net.send(SERVER, str(cid), "roster", payload,
                     receiver_live=net.responds(cid))
            if not net.responds(cid):
                self.ka.drop_silent(cid)
                continue
            cheat = self.adv.bad_share.get(cid)
            own_msg, succ_msg = member.deal(own, pred, succ, cfg.threshold, cheat)
            if self._client_send(cid, "dealing", _enc_dealing(g, own_msg, succ_msg)):
                dealings[cid] = (own_msg, succ_msg)
            else:
                self.ka.drop_silent(cid, "bad-response")
        for cid, (own_msg, succ_msg) in dealings.items():
            i, j = self.committee_of[cid]
            self.ka.store_dealing(i, j, own_msg, succ_msg)

        net.begin_round("ka2")
        all_reports: dict[int, list[FaultReport]] = {}
        for cid, member in self.members.items():
            if cid in self.ka.dropped:
                continue
            i, j = self.committee_of[cid]
            own_items, pred_items = self.ka.relay_for(i, j)
            payload = _enc_relay(g, own_items, pred_items)
            net.send(SERVER, str(cid), "relay", payload,
                     receiver_live=net.responds(cid))
            if not net.responds(cid):
                self.ka.drop_silent(cid)
                continue
            reports = member.receive_shares(own_items, pred_items)
            reports.extend(self._fabricated_reports(member))
            if self._client_send(cid, "faults", _enc_faults(g, reports)):
                if reports:
                    all_reports[cid] = reports
            else:
                self.ka.drop_silent(cid, "bad-response")
        for cid, reports in all_reports.items():
            i, j = self.committee_of[cid]
            self.ka.adjudicate(i, j, reports)
        self.ka.agree_dealers()
        for i in range(1, cfg.n_committees + 1):
            if len(self.live_members(i)) < cfg.threshold:
                self.events.append({"event": "abort", "why": f"committee {i} below threshold"})
                return "abort"
            if not self.ka.dealers_own[i]:
                self.events.append({"event": "abort", "why": f"committee {i} has no dealers"})
                return "abort"

        net.begin_round("ka3")
        offsets: dict[int, dict[int, int]] = {i: {} for i in range(1, cfg.n_committees + 1)}
        for cid, member in self.members.items():
            if cid in self.ka.dropped:
                continue
            i, j = self.committee_of[cid]
            payload = _enc_adjudication(
                g, self.ka.dropped, self.ka.dealers_own[i], self.ka.dealers_pred[i]
            )
            net.send(SERVER, str(cid), "adjudication", payload,
                     receiver_live=net.responds(cid))
            if not net.responds(cid):
                self.ka.drop_silent(cid)
                continue
            try:
                offset = member.accept_dealers(
                    self.ka.dealers_own[i], self.ka.dealers_pred[i]
                )
            except KeyError:
                # missing a share from an agreed dealer; cannot proceed
                self.ka.drop_silent(cid, "missing-share")
                continue
            if offset is not None and cid in self.adv.bad_offset:
                offset = (offset + 1) % g.order
            if self._client_send(cid, "offset", _enc_offset(g, offset)):
                if offset is not None:
                    offsets[i][j] = offset
            else:
                self.ka.drop_silent(cid, "bad-response")
        for i in range(2, cfg.n_committees + 1):
            if not self.ka.take_offsets(i, offsets[i]):
                self.events.append(
                    {"event": "abort", "why": f"committee {i} offsets below threshold"}
                )
                return "abort"
        self.pk = self.ka.finish_key()
        if self.cfg.protocol == "amortized":
            self.sk_offset = g.rand_scalar(self.server_rng)
            self.pk_enc = g.mul(
                self.pk, g.pow(g.g, self.sk_offset, self.server_counter)
            )
        else:
            self.pk_enc = self.pk
        return None

    def collect_inputs(self) -> Optional[dict[int, tuple]]:
        cfg, g, net = self.cfg, self.group, self.net
        net.begin_round("ka4")
        bundles: dict[int, tuple] = {}
        for cid in range(cfg.n_clients):
            if cid in self.ka.dropped:
                continue
            member = self.members.get(cid)
            d_i = None
            if member is not None:
                d_i = self.ka.d[member.committee]
            payload = _enc_publish(g, self.pk, self.pk_enc, d_i, cfg.payload_size)
            net.send(SERVER, str(cid), "publish", payload,
                     receiver_live=net.responds(cid))
            if not net.responds(cid):
                self.ka.drop_silent(cid)
                continue
            if member is not None:
                member.finalize(d_i)
            data = self.inputs[cid]
            sub = self.adv.substitute_input.get(cid)
            if sub is not None:
                data = bytes.fromhex(sub)
            rng = self.rngs[cid]
            counter = self.counters[cid]
            bundle = tuple(
                encrypt(g, self.pk_enc, m, g.rand_scalar(rng), counter)
                for m in g.encode_payload(data)
            )
            if self._client_send(cid, "input", _enc_ct_bundles(g, [bundle])):
                bundles[cid] = bundle
            else:
                self.ka.drop_silent(cid, "bad-response")
        self.missing_inputs = cfg.n_clients - len(bundles)
        if self.missing_inputs > int(self.cfg.alpha * cfg.n_clients):
            return None
        return bundles

    # shuffling

    def shuffle_attempt(self, shuffler_cid: int, bundles: list[tuple],
                        label: str) -> tuple[bool, list[tuple]]:
        """One send/respond exchange with one shuffler; the round must
        already be open.  Returns (valid, new_bundles)."""
        g, net = self.group, self.net
        payload = _enc_shuffle_req(g, self.pk_enc, bundles)
        net.send(SERVER, str(shuffler_cid), "shuffle-req", payload,
                 receiver_live=net.responds(shuffler_cid))
        if not net.responds(shuffler_cid):
            self.ka.drop_silent(shuffler_cid)
            self.events.append({"event": "shuffle-missing", "shuffler": shuffler_cid, "label": label})
            return False, bundles
        rng = self.rngs[shuffler_cid]
        counter = self.counters[shuffler_cid]
        n = len(bundles)
        if shuffler_cid in self.adv.bad_shuffle:
            garbage = bytes(self.cfg.payload_size)
            fake = tuple(
                encrypt(g, self.pk_enc, m, g.rand_scalar(rng), counter)
                for m in g.encode_payload(garbage)
            )
            out = list(bundles)
            out[0] = fake
            proof = forge_shuffle_attempt(g, self.pk_enc, bundles, out, self.cfg.sigma_rep, rng)
        else:
            perm = list(range(n))
            rng.shuffle(perm)
            rands = [
                tuple(g.rand_scalar(rng) for _ in range(self.width))
                for _ in range(n)
            ]
            out = apply_shuffle(g, self.pk_enc, bundles, perm, rands, counter)
            proof = prove_shuffle(
                g, self.pk_enc, bundles, out, perm, rands, self.cfg.sigma_rep,
                rng, counter,
            )
        accepted = self._client_send(shuffler_cid, "shuffle", _enc_shuffle_resp(g, out, proof))
        if not accepted:
            self.ka.drop_silent(shuffler_cid, "bad-response")
            self.events.append({"event": "shuffle-missing", "shuffler": shuffler_cid, "label": label})
            return False, bundles
        ok = verify_shuffle(
            g, self.pk_enc, bundles, out, proof, self.cfg.sigma_rep, self.server_counter
        )
        if not ok:
            self.ka.drop_silent(shuffler_cid, "bad-shuffle")
            self.events.append({"event": "shuffle-rejected", "shuffler": shuffler_cid, "label": label})
            return False, bundles
        return True, [tuple(u) for u in out]

    def run_amortized_shuffles(self, bundles: list[tuple]) -> Optional[list[tuple]]:
        cfg = self.cfg
        shufflers = list(range(cfg.n_clients - cfg.n_shufflers, cfg.n_clients))
        need = cfg.n_shufflers - cfg.dropout_allowance
        valid = failures = wave = 0
        for scid in shufflers:
            if scid in self.ka.dropped:
                # the server already knows; skip without burning a round
                failures += 1
            else:
                wave += 1
                self.net.begin_round(f"shuf{wave}")
                ok, bundles = self.shuffle_attempt(scid, bundles, f"shuf{wave}")
                if ok:
                    valid += 1
                    if valid == need:
                        return bundles
                    continue
                failures += 1
            if failures == cfg.dropout_allowance + 1:
                self.events.append({"event": "abort", "why": "too many shuffle failures"})
                return None
        return bundles if valid >= need else None

    def run_alternating_shuffles(self, bundles: list[tuple]) -> Optional[list[tuple]]:
        cfg, g = self.cfg, self.group
        # fold a fresh server-held offset into every ciphertext: shuffling
        # runs under the combined key, decryption shifts it back out
        self.sk_offset = g.rand_scalar(self.server_rng)
        self.pk_enc = g.mul(self.pk, g.pow(g.g, self.sk_offset, self.server_counter))
        bundles = [
            tuple(shift_key(g, ct, self.sk_offset, self.server_counter) for ct in b)
            for b in bundles
        ]
        # pad missing inputs so the grid is full; padding is shuffled and
        # decrypted like anything else
        while len(bundles) < cfg.n_clients:
            data = b"\xff" * cfg.payload_size
            bundle = tuple(
                encrypt(g, self.pk_enc, m, g.rand_scalar(self.server_rng), self.server_counter)
                for m in g.encode_payload(data)
            )
            bundles.append(bundle)
            self.padded += 1
        perm = list(range(len(bundles)))
        self.server_rng.shuffle(perm)
        self.events.append({"event": "grid", "perm": perm, "h": cfg.grid_h, "w": cfg.grid_w})
        arranged = [bundles[p] for p in perm]
        grid = [
            arranged[r * cfg.grid_w : (r + 1) * cfg.grid_w]
            for r in range(cfg.grid_h)
        ]
        n_sc = cfg.n_shuffle_committees or min(
            cfg.n_clients // cfg.n_shufflers, max(cfg.grid_h, cfg.grid_w)
        )
        if n_sc < 1:
            raise ConfigError("violated: n_clients // n_shufflers >= 1")
        pool_base = cfg.n_clients - n_sc * cfg.n_shufflers
        if pool_base < 0:
            raise ConfigError("violated: n_shuffle_committees * n_shufflers <= n_clients")
        committees = [
            list(range(pool_base + c * cfg.n_shufflers,
                       pool_base + (c + 1) * cfg.n_shufflers))
            for c in range(n_sc)
        ]
        need = cfg.n_shufflers - cfg.dropout_allowance
        for it in range(1, cfg.iterations + 1):
            rows = len(grid)
            for batch_start in range(0, rows, n_sc):
                batch = list(range(batch_start, min(batch_start + n_sc, rows)))
                state = {
                    r: {"valid": 0, "failures": 0, "attempt": 0}
                    for r in batch
                }
                active = set(batch)
                while active:
                    self.net.begin_round(f"it{it}w")
                    for r in sorted(active):
                        st = state[r]
                        committee = committees[(r - batch_start) % n_sc]
                        # skip members the server already dropped; each skip
                        # still spends allowance but no round
                        scid = None
                        while st["attempt"] < len(committee):
                            cand = committee[st["attempt"]]
                            st["attempt"] += 1
                            if cand not in self.ka.dropped:
                                scid = cand
                                break
                            st["failures"] += 1
                            if st["failures"] == cfg.dropout_allowance + 1:
                                self.events.append(
                                    {"event": "abort", "why": f"row {r} shuffle failures"}
                                )
                                return None
                        if scid is None:
                            self.events.append(
                                {"event": "abort", "why": f"row {r} committee exhausted"}
                            )
                            return None
                        ok, new_row = self.shuffle_attempt(scid, grid[r], f"it{it}row{r}")
                        if ok:
                            grid[r] = new_row
                            st["valid"] += 1
                            if st["valid"] == need:
                                active.discard(r)
                        else:
                            st["failures"] += 1
                            if st["failures"] == cfg.dropout_allowance + 1:
                                self.events.append(
                                    {"event": "abort", "why": f"row {r} shuffle failures"}
                                )
                                return None
            grid = [list(col) for col in zip(*grid)]
            self.events.append({"event": "transpose", "after_iteration": it})
        return [cell for row in grid for cell in row]

    # decryption

    def run_decrypt(self, bundles: list[tuple]) -> Optional[list[bytes]]:
        cfg, g, net = self.cfg, self.group, self.net
        if self.sk_offset:
            bundles = [
                tuple(
                    shift_key(g, ct, -self.sk_offset % g.order, self.server_counter)
                    for ct in bundle
                )
                for bundle in bundles
            ]
        m = cfg.n_committees
        n_b = len(bundles)
        sizes = [n_b // m + (1 if i < n_b % m else 0) for i in range(m)]
        slices = []
        at = 0
        for s in sizes:
            slices.append(bundles[at : at + s])
            at += s
        net.begin_round("dec")
        proofs_by_committee: dict[int, dict[int, object]] = {i: {} for i in range(1, m + 1)}
        for i in range(1, m + 1):
            flat = [ct for bundle in slices[i - 1] for ct in bundle]
            payload = Writer(g).ciphertext_list(flat).done()
            for cid, _ in self.ka.rosters[i]:
                if cid in self.ka.dropped:
                    continue
                net.send(SERVER, str(cid), "decrypt-req", payload,
                         receiver_live=net.responds(cid))
                if not net.responds(cid):
                    self.ka.drop_silent(cid)
                    continue
                member = self.members[cid]
                proof = member.partial_decrypt(flat)
                if cid in self.adv.bad_partial_dec and proof.values:
                    proof = proof._replace(
                        values=(g.mul(proof.values[0], g.g),) + proof.values[1:]
                    )
                if self._client_send(cid, "partial-dec", _enc_partial_dec(g, proof)):
                    proofs_by_committee[i][member.pos] = proof
                else:
                    self.ka.drop_silent(cid, "bad-response")
        outputs: list[bytes] = []
        for i in range(1, m + 1):
            flat = [ct for bundle in slices[i - 1] for ct in bundle]
            plains = combine_partial_decryptions(
                g, flat, proofs_by_committee[i], self.ka.share_commitments[i],
                cfg.threshold, self.server_counter,
            )
            if plains is None:
                self.events.append(
                    {"event": "abort", "why": f"committee {i} below threshold in decryption"}
                )
                return None
            for b in range(len(slices[i - 1])):
                els = plains[b * self.width : (b + 1) * self.width]
                try:
                    # the codec works at the group's full capacity; the tail
                    # beyond the advertised payload size is zero padding
                    outputs.append(g.decode_payload(list(els))[: cfg.payload_size])
                except ValueError:
                    self.events.append({"event": "undecodable", "committee": i, "slot": b})
                    outputs.append(None)
        return outputs

    def run(self) -> SimResult:
        failed = self.run_key_agreement()
        if failed:
            return self._result("abort")
        bundles_by_cid = self.collect_inputs()
        if bundles_by_cid is None:
            return self._result("bottom")
        bundles = [bundles_by_cid[cid] for cid in sorted(bundles_by_cid)]
        if self.cfg.protocol == "amortized":
            shuffled = self.run_amortized_shuffles(bundles)
        else:
            shuffled = self.run_alternating_shuffles(bundles)
        if shuffled is None:
            return self._result("abort")
        outputs = self.run_decrypt(shuffled)
        if outputs is None:
            return self._result("abort")
        return self._result("ok", outputs)


def run_protocol(
    config: ProtocolConfig,
    adversary: AdversarySpec | None = None,
    dropouts: DropoutSchedule | None = None,
    seed: int = 0,
    inputs: Optional[list[bytes]] = None,
) -> SimResult:
    return _Run(
        config,
        adversary or AdversarySpec(),
        dropouts or DropoutSchedule(),
        seed,
        inputs,
    ).run()
