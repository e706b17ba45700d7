import json
from dataclasses import asdict, replace

import pytest

from altshuffle.sim import (
    SERVER,
    AdversarySpec,
    ConfigError,
    DropoutSchedule,
    ProtocolConfig,
    default_input,
    run_protocol,
)


def _cfg(**kw):
    base = dict(
        protocol="amortized", group="tiny31", n_clients=16, n_committees=2,
        committee_size=4, threshold=3, n_shufflers=4, dropout_allowance=1,
        sigma_rep=4, alpha=0.25,
    )
    base.update(kw)
    return ProtocolConfig(**base)


def _alt_cfg(**kw):
    base = dict(
        protocol="alternating", group="tiny31", n_clients=16, n_committees=2,
        committee_size=4, threshold=3, n_shufflers=2, dropout_allowance=0,
        sigma_rep=4, alpha=0.25, grid_h=4, grid_w=4, iterations=1,
    )
    base.update(kw)
    return ProtocolConfig(**base)


def _input_multiset(cfg, seed):
    counts = {}
    for cid in range(cfg.n_clients):
        h = default_input(seed, cid, cfg.payload_size).hex()
        counts[h] = counts.get(h, 0) + 1
    return counts


class TestConfigValidation:
    @pytest.mark.parametrize("bad", [
        dict(group="nosuch"),
        dict(protocol="serial"),
        dict(threshold=0),
        dict(threshold=5),
        dict(n_committees=5),
        dict(n_shufflers=0),
        dict(n_shufflers=17),
        dict(dropout_allowance=4),
        dict(dropout_allowance=-1),
        dict(sigma_rep=0),
        dict(alpha=1.5),
        dict(alpha=-0.1),
        dict(payload_bytes=5),
    ])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            _cfg(**bad).validate()

    @pytest.mark.parametrize("bad", [
        dict(grid_h=0),
        dict(grid_h=3),
        dict(grid_h=2, grid_w=4),
        dict(iterations=0),
    ])
    def test_rejects_alternating(self, bad):
        with pytest.raises(ConfigError):
            _alt_cfg(**bad).validate()

    def test_error_names_inequality(self):
        with pytest.raises(ConfigError, match="violated:"):
            _cfg(threshold=9).validate()

    def test_good_configs_pass(self):
        _cfg().validate()
        _alt_cfg().validate()


class TestDeterminism:
    def test_same_seed_same_everything(self):
        a = run_protocol(_cfg(), seed=7)
        b = run_protocol(_cfg(), seed=7)
        assert a.summary_dict() == b.summary_dict()
        assert [asdict(m) for m in a.transcript] == [asdict(m) for m in b.transcript]

    def test_different_seed_different_key(self):
        a = run_protocol(_cfg(), seed=7)
        b = run_protocol(_cfg(), seed=8)
        assert a.pk != b.pk

    def test_alternating_deterministic(self):
        a = run_protocol(_alt_cfg(), seed=3)
        b = run_protocol(_alt_cfg(), seed=3)
        assert a.summary_dict() == b.summary_dict()


class TestHonestRuns:
    def test_amortized_ok(self):
        res = run_protocol(_cfg(), seed=1)
        assert res.status == "ok"
        assert res.dropped == []
        assert res.missing_inputs == 0

    def test_output_multiset_matches_inputs(self):
        cfg = _cfg()
        res = run_protocol(cfg, seed=2)
        assert res.output_multiset() == _input_multiset(cfg, 2)

    def test_alternating_output_multiset(self):
        cfg = _alt_cfg()
        res = run_protocol(cfg, seed=2)
        assert res.status == "ok"
        assert res.output_multiset() == _input_multiset(cfg, 2)

    def test_amortized_round_count(self):
        # 4 key rounds, n_shufflers - allowance shuffle rounds, 1 decrypt
        cfg = _cfg()
        res = run_protocol(cfg, seed=3)
        assert res.rounds == 4 + (cfg.n_shufflers - cfg.dropout_allowance) + 1

    def test_alternating_round_count(self):
        cfg = _alt_cfg(iterations=2)
        res = run_protocol(cfg, seed=3)
        # each iteration: one batch of 4 rows, 2 waves to reach quota
        assert res.rounds == 4 + 2 * 2 + 1

    def test_payload_bytes_override(self):
        cfg = _cfg(payload_bytes=2)
        res = run_protocol(cfg, seed=4)
        assert res.status == "ok"
        assert all(len(o) == 4 for o in res.outputs)
        assert res.output_multiset() == _input_multiset(cfg, 4)

    def test_explicit_inputs(self):
        cfg = _cfg()
        inputs = [bytes([i, i, i, i]) for i in range(cfg.n_clients)]
        res = run_protocol(cfg, seed=5, inputs=inputs)
        assert sorted(res.outputs) == sorted(x.hex() for x in inputs)

    def test_equal_width_grid_matches_amortized_semantics(self):
        # a 1-row grid shuffled once is a plain full shuffle
        cfg = _alt_cfg(grid_h=1, grid_w=16, n_shufflers=2)
        res = run_protocol(cfg, seed=6)
        assert res.status == "ok"
        assert res.output_multiset() == _input_multiset(cfg, 6)


class TestAccounting:
    def scenarios(self):
        yield _cfg(), AdversarySpec(), DropoutSchedule(), 11
        yield _cfg(), AdversarySpec(bad_shuffle=[13]), DropoutSchedule(), 12
        yield _alt_cfg(), AdversarySpec(), DropoutSchedule(silent_from={0: 4}), 13
        yield _cfg(), AdversarySpec(send_malformed={9: [4]}), DropoutSchedule(), 14

    def test_byte_conservation(self):
        for cfg, adv, drops, seed in self.scenarios():
            res = run_protocol(cfg, adv, drops, seed)
            assert sum(res.bytes_sent.values()) == \
                sum(res.bytes_received.values()) + res.discarded_bytes

    def test_star_topology(self):
        for cfg, adv, drops, seed in self.scenarios():
            res = run_protocol(cfg, adv, drops, seed)
            for msg in res.transcript:
                assert SERVER in (msg.sender, msg.receiver)
                assert msg.sender != msg.receiver

    def test_transcript_jsonl(self, tmp_path):
        res = run_protocol(_cfg(), seed=15)
        path = tmp_path / "t.jsonl"
        res.write_transcript(str(path))
        lines = path.read_text().splitlines()
        assert len(lines) == len(res.transcript)
        for line in lines:
            rec = json.loads(line)
            assert {"round", "label", "sender", "receiver", "kind", "size",
                    "accepted"} <= set(rec)

    def test_exps_counted_for_everyone(self):
        res = run_protocol(_cfg(), seed=16)
        assert res.exps[SERVER] > 0
        for cid in range(16):
            assert res.exps[str(cid)] > 0

    def test_rounds_match_transcript(self):
        res = run_protocol(_cfg(), seed=17)
        assert res.rounds == max(m.round for m in res.transcript)


class TestDropouts:
    def test_bottom_when_too_many_missing(self):
        drops = DropoutSchedule(silent_from={8: 4, 9: 4, 10: 4, 11: 4, 12: 4})
        res = run_protocol(_cfg(), dropouts=drops, seed=21)
        assert res.status == "bottom"
        assert res.missing_inputs == 5
        assert res.outputs is None

    def test_ok_at_missing_boundary(self):
        # int(alpha * n) = 4 missing is still tolerated
        drops = DropoutSchedule(silent_from={8: 4, 9: 4, 10: 4, 11: 4})
        res = run_protocol(_cfg(), dropouts=drops, seed=22)
        assert res.status == "ok"
        assert res.missing_inputs == 4
        assert len(res.outputs) == 12

    def test_known_dropped_shuffler_costs_no_round(self):
        # shuffler 12 vanishes before the shuffle phase: the server knows
        # and skips it, so the round count stays at the honest value
        drops = DropoutSchedule(silent_from={12: 4})
        res = run_protocol(_cfg(), dropouts=drops, seed=23)
        assert res.status == "ok"
        assert res.rounds == 4 + 3 + 1

    def test_fresh_shuffler_dropout_burns_a_round(self):
        # shuffler 12 vanishes at its own shuffle round: one wasted round
        drops = DropoutSchedule(silent_from={12: 5})
        res = run_protocol(_cfg(), dropouts=drops, seed=24)
        assert res.status == "ok"
        assert res.rounds == 4 + 4 + 1
        assert any(e.get("event") == "shuffle-missing" for e in res.events)

    def test_too_many_shuffler_dropouts_abort(self):
        drops = DropoutSchedule(silent_from={12: 5, 13: 5})
        res = run_protocol(_cfg(), dropouts=drops, seed=25)
        assert res.status == "abort"
        assert any("shuffle failures" in e.get("why", "") for e in res.events)

    def test_alternating_padding(self):
        # committee members 0 and 4 miss the input round; their slots are
        # padded so the grid stays full
        cfg = _alt_cfg()
        drops = DropoutSchedule(silent_from={0: 4, 4: 4})
        res = run_protocol(cfg, dropouts=drops, seed=26)
        assert res.status == "ok"
        assert res.missing_inputs == 2
        assert res.padded == 2
        filler = ("ff" * cfg.payload_size)
        assert res.output_multiset().get(filler, 0) == 2

    def test_amortized_never_pads(self):
        drops = DropoutSchedule(silent_from={8: 4})
        res = run_protocol(_cfg(), dropouts=drops, seed=27)
        assert res.status == "ok"
        assert res.padded == 0
        assert len(res.outputs) == 15


class TestAdversary:
    def test_substitute_input(self):
        cfg = _cfg()
        adv = AdversarySpec(substitute_input={10: "deadbeef"})
        res = run_protocol(cfg, adv, seed=31)
        assert res.status == "ok"
        counts = res.output_multiset()
        assert counts.get("deadbeef") == 1
        assert default_input(31, 10, 4).hex() not in counts

    def test_bad_shuffle_rejected_and_tolerated(self):
        # sigma_rep high enough that the forgery has no realistic chance
        cfg = _cfg(sigma_rep=20)
        adv = AdversarySpec(bad_shuffle=[13])
        res = run_protocol(cfg, adv, seed=32)
        assert res.status == "ok"
        assert any(e.get("event") == "shuffle-rejected" for e in res.events)
        assert 13 in res.dropped
        # the substitution never reaches the output
        assert res.output_multiset() == _input_multiset(cfg, 32)

    def test_two_bad_shufflers_abort(self):
        adv = AdversarySpec(bad_shuffle=[12, 13])
        res = run_protocol(_cfg(sigma_rep=20), adv, seed=33)
        assert res.status == "abort"

    def test_malformed_input_discarded(self):
        adv = AdversarySpec(send_malformed={9: [4]})
        res = run_protocol(_cfg(), adv, seed=34)
        assert res.status == "ok"
        assert res.missing_inputs == 1
        recs = [m for m in res.transcript if m.sender == "9" and m.malformed]
        assert len(recs) == 1
        assert not recs[0].accepted
        assert res.discarded_bytes >= recs[0].size

    def test_late_input_discarded(self):
        adv = AdversarySpec(send_late={9: [4]})
        res = run_protocol(_cfg(), adv, seed=35)
        assert res.status == "ok"
        assert res.missing_inputs == 1
        recs = [m for m in res.transcript if m.sender == "9" and m.late]
        assert len(recs) == 1
        assert not recs[0].accepted

    def test_malformed_bytes_stay_in_senders_total(self):
        adv = AdversarySpec(send_malformed={9: [4]})
        clean = run_protocol(_cfg(), seed=36)
        dirty = run_protocol(_cfg(), adv, seed=36)
        assert dirty.bytes_sent["9"] == clean.bytes_sent["9"]

    def test_silent_committee_member_merged_from_adversary(self):
        adv = AdversarySpec(go_silent={8: 4})
        res = run_protocol(_cfg(), adv, seed=37)
        assert res.status == "ok"
        assert res.missing_inputs == 1
