# tests/test_protocol.py
import pytest

from qdsig.core.dependencies import get_code_for
from qdsig.core.exceptions import ProtocolAbort
from qdsig.models.codes import Syndrome
from qdsig.models.messages import DisputeOutcome, MessageKind, Party, VerdictReason
from qdsig.services import qcrypto
from qdsig.services.fingerprint import fingerprint_qubits
from qdsig.services.parties import failed_blocks
from qdsig.services.protocol import (
    HONEST_MESSAGE_COUNT, ProtocolSession, key_budget, replay_transcript, resolve_dispute, run_honest_session,
    run_dispute_scenario, run_session, setup_keys, transcript_records,
)
from qdsig.services.quantum_core import random_state
from qdsig.utils.bits import xor_bits
from qdsig.utils.random_stream import RandomStream
from qdsig.utils.stats import binomial_sigma

HONEST_ORDER = [
    MessageKind.QUANTUM_PAYLOAD, MessageKind.SIGNATURE_COPIES, MessageKind.C1,
    MessageKind.SIGNATURE_COPIES, MessageKind.C2, MessageKind.C3, MessageKind.C4,
]


class TestHonestSession:
    @pytest.mark.parametrize("n_msg", [1, 2])
    def test_accepts_and_recovers_message(self, make_config, n_msg):
        session = run_session(make_config(n_msg=n_msg))
        assert session.verdict.accepted
        assert session.verdict.reason == VerdictReason.ACCEPTED
        assert session.verdict.e_count == 0
        assert session.verdict.exact_match
        assert session.recovered_fidelity() == pytest.approx(1.0, abs=1e-10)

    def test_many_seeds(self, make_config):
        for seed in range(10):
            session = run_session(make_config(master_seed=seed))
            assert session.verdict.accepted, seed

    def test_message_order(self, small_config):
        session = run_session(small_config)
        assert len(session.transcript) == HONEST_MESSAGE_COUNT
        assert session.transcript.kinds() == HONEST_ORDER
        senders = [(m.sender, m.receiver) for m in session.transcript.messages]
        assert senders[2] == (Party.ALICE, Party.TRENT)
        assert senders[-1] == (Party.TRENT, Party.BOB)
        assert all(m.seq_num == small_config.seq_num for m in session.transcript.messages)

    def test_derived_x_masks_qotp_key(self, small_config):
        session = run_session(small_config)
        alice = session.alice
        prefix = alice.s.bits[:small_config.s_used_bits]
        assert alice.X.bits == xor_bits(alice.x.bits, prefix)
        assert session.bob.held.X_B == alice.X

    def test_keys_consumed_in_lockstep(self, small_config):
        session = run_session(small_config)
        budget = key_budget(small_config)
        reserve = small_config.key_reserve_bits
        assert session.alice.k_at.consumed == session.trent.k_at.consumed == budget["K_AT"] - reserve
        assert session.trent.k_tb.consumed == session.bob.k_tb.consumed == budget["K_TB"] - reserve
        assert set(session.bob.k_tb.used_by) == {"C2", "C3", "C4"}
        assert session.setup.keys.k_ab.consumed == 0

    def test_summary(self, small_config):
        summary = run_session(small_config).summary()
        assert summary["message_count"] == HONEST_MESSAGE_COUNT
        assert summary["keys"]["K_AB"]["unused"]
        assert summary["verdict"]["accepted"]
        assert [d["event"] for d in summary["decisions"]] == ["signed", "proceed", "challenge", "accept"]

    def test_same_seed_same_keys(self, small_config):
        a, b = setup_keys(small_config), setup_keys(small_config)
        assert a.keys.k_at.bits == b.keys.k_at.bits
        assert a.keypairs.secret_keys() == b.keypairs.secret_keys()


class TestReplay:
    def test_replay_matches(self, small_config):
        records = transcript_records(run_session(small_config).transcript)
        assert replay_transcript(small_config, records)

    def test_altered_record_is_detected(self, small_config):
        records = transcript_records(run_session(small_config).transcript)
        records[4] = dict(records[4], bits="0" * len(records[4]["bits"]))
        assert not replay_transcript(small_config, records)

    def test_missing_record_is_detected(self, small_config):
        records = transcript_records(run_session(small_config).transcript)
        assert not replay_transcript(small_config, records[:-1])


class TestMalformed:
    def test_flipped_length_prefix_in_c1(self, small_config):
        session = ProtocolSession(small_config)

        def flip_first_bit(message):
            return message.with_bits((1 - message.bits[0],) + message.bits[1:])

        session.channel.add_tap(flip_first_bit, sender=Party.ALICE, receiver=Party.TRENT,
                                kind=MessageKind.C1)
        verdict = session.run()
        assert not verdict.accepted
        assert verdict.reason == VerdictReason.MALFORMED_MESSAGE
        assert verdict.party == Party.TRENT
        assert session.evidence is None

    def test_dropped_c2_rejected_by_bob(self, small_config):
        session = ProtocolSession(small_config)
        session.alice_sign()
        session.trent_verify()
        session.channel._inboxes[Party.BOB] = [m for m in session.channel.inbox(Party.BOB)
                                                if m.kind != MessageKind.C2]
        with pytest.raises(ProtocolAbort) as info:
            session.bob_receive_and_challenge()
        assert info.value.reason == VerdictReason.MALFORMED_MESSAGE

    def test_out_of_order_calls(self, small_config):
        session = ProtocolSession(small_config)
        with pytest.raises(ProtocolAbort):
            session.trent_verify()
        with pytest.raises(ProtocolAbort):
            session.bob_finalize()

    def test_wrong_syndrome_release(self, small_config):
        session = ProtocolSession(small_config)

        def corrupt_c4(message):
            return message.with_bits(message.bits[:-1] + (1 - message.bits[-1],))

        session.channel.add_tap(corrupt_c4, sender=Party.TRENT, receiver=Party.BOB,
                                kind=MessageKind.C4)
        verdict = session.run()
        assert verdict.reason == VerdictReason.SYNDROME_MISMATCH

    @pytest.mark.parametrize("kind,sender,receiver,rejecting_party", [
        (MessageKind.C1, Party.ALICE, Party.TRENT, Party.TRENT),
        (MessageKind.C2, Party.TRENT, Party.BOB, Party.BOB),
        (MessageKind.C3, Party.BOB, Party.TRENT, Party.TRENT),
        (MessageKind.C4, Party.TRENT, Party.BOB, Party.BOB),
    ])
    @pytest.mark.parametrize("change", [200, -1])
    def test_resized_ciphertext_aborts(self, small_config, kind, sender, receiver, rejecting_party, change):
        session = ProtocolSession(small_config)

        def resize(message):
            bits = message.bits + (0,) * change if change > 0 else message.bits[:change]
            return message.with_bits(bits)

        session.channel.add_tap(resize, sender=sender, receiver=receiver, kind=kind)
        verdict = session.run()
        assert not verdict.accepted
        assert verdict.reason == VerdictReason.MALFORMED_MESSAGE
        assert verdict.party == rejecting_party

    def test_flipped_qotp_bit_in_c2(self, make_config):
        trials = 40
        rejected = 0
        for seed in range(trials):
            config = make_config(master_seed=seed)
            session = ProtocolSession(config)

            def flip_last_bit(message):
                return message.with_bits(message.bits[:-1] + (1 - message.bits[-1],))

            session.channel.add_tap(flip_last_bit, sender=Party.TRENT, receiver=Party.BOB,
                                    kind=MessageKind.C2)
            verdict = session.run()
            assert not (verdict.accepted and verdict.exact_match)
            rejected += int(not verdict.accepted)
        delta = get_code_for(make_config()).delta
        floor = 1.0 - ((1.0 + delta ** 2) / 2.0) ** 2
        assert rejected / trials >= floor - 4 * binomial_sigma(floor, trials)


class TestArbitratorCopies:
    def test_second_copy_is_checked_against_reference(self, make_config):
        trials = 120
        proceeded = 0
        for seed in range(trials):
            config = make_config(master_seed=seed)
            session = ProtocolSession(config)
            block_qubits = fingerprint_qubits(session.setup.code, config.fingerprint_form)
            rng = RandomStream(seed)

            def replace_second_copy(message):
                half = len(message.states) // 2
                noise = tuple(random_state(block_qubits, rng) for _ in range(half))
                return message.with_states(message.states[:half] + noise)

            session.channel.add_tap(replace_second_copy, sender=Party.ALICE, receiver=Party.TRENT,
                                    kind=MessageKind.SIGNATURE_COPIES)
            session.alice_sign()
            try:
                session.trent_verify()
            except ProtocolAbort:
                continue
            proceeded += 1
            assert session.evidence is not None
        # a block with one random copy passes all three tests about 27% of the time
        assert proceeded <= 20

    def test_honest_copies_pass(self, small_config, rng):
        session = run_session(small_config)
        reference = session.registry.signature_for(session.alice.X)
        assert failed_blocks(session.alice.signature, session.alice.signature, reference, rng, 5) == []


class TestDisputes:
    def test_repudiation_blames_alice(self, small_config):
        verdict, session = run_dispute_scenario(small_config, "repudiation")
        assert verdict.outcome == DisputeOutcome.ALICE_CHEATING
        assert verdict.failed_blocks == 0
        assert verdict.syndrome_match
        assert len(session.transcript) == HONEST_MESSAGE_COUNT + 2
        assert session.transcript.kinds()[-2:] == [MessageKind.DISPUTE_REQUEST, MessageKind.DISPUTE_VERDICT]
        assert session.transcript.messages[-1].bits == (0, 0)

    def test_fabrication_is_usually_caught(self, make_config):
        caught = sum(
            run_dispute_scenario(make_config(master_seed=seed), "fabrication")[0].outcome
            == DisputeOutcome.FORGED_BY_BOB_OR_OTHER
            for seed in range(30)
        )
        assert caught >= 20

    def test_no_evidence_is_unresolvable(self, small_config):
        session = run_session(small_config)
        verdict = resolve_dispute(session.bob.held.copy_1, session.bob.held.s_B, None,
                                  session.registry, RandomStream(0))
        assert verdict.outcome == DisputeOutcome.UNRESOLVABLE

    def test_wrong_syndrome_claim(self, small_config):
        session = run_session(small_config)
        held = session.bob.held
        other = held.s_B.xor(Syndrome((1,) + (0,) * (len(held.s_B) - 1)))
        verdict = resolve_dispute(held.copy_1, other, session.evidence, session.registry, RandomStream(0))
        assert verdict.outcome == DisputeOutcome.FORGED_BY_BOB_OR_OTHER
        assert not verdict.syndrome_match

    def test_unknown_scenario(self, small_config):
        with pytest.raises(ValueError):
            run_dispute_scenario(small_config, "bribery")


class TestKeyBudget:
    def test_c1_fits_k_at(self, small_config):
        budget = key_budget(small_config)
        expected = qcrypto.c1_length(small_config.syndrome_bits, 8, 2 * small_config.n_msg)
        assert budget["K_AT"] == expected + small_config.key_reserve_bits
        assert budget["K_AB"] == small_config.key_reserve_bits


class TestRunHonestSession:
    def test_returns_transcript_and_verdict(self, small_config):
        transcript, verdict = run_honest_session(small_config)
        assert verdict.accepted
        assert transcript.kinds() == HONEST_ORDER
