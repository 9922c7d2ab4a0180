# tests/test_adversary.py
import pytest

from qdsig.models.keys import QotpKey
from qdsig.models.messages import VerdictReason
from qdsig.models.quantum import StateVector
from qdsig.services import qcrypto
from qdsig.services.adversary import (
    analytic_bound, attack_forge_with_partial_key, attack_substitute_state, attack_tamper_signature,
    estimate_forgery_success, holevo_budget, simulate_trial,
)
from qdsig.services.protocol import ProtocolSession
from qdsig.services.quantum_core import fidelity
from qdsig.utils.random_stream import RandomStream
from qdsig.utils.stats import binomial_sigma


class TestHolevoBudget:
    @pytest.mark.parametrize("t,m,expected", [(0, 16, 0), (1, 16, 4), (3, 32, 15), (2, 17, 10)])
    def test_values(self, t, m, expected):
        assert holevo_budget(t, m) == expected

    @pytest.mark.parametrize("t,m", [(-1, 16), (1, 0)])
    def test_rejects_bad_arguments(self, t, m):
        with pytest.raises(ValueError):
            holevo_budget(t, m)


class TestAnalyticBound:
    def test_reference_values(self, small_config):
        assert analytic_bound("honest", small_config) == 1.0
        assert analytic_bound("substitute_state", small_config) == pytest.approx(1 / 16)
        assert analytic_bound("forge_partial_key", small_config, t=0) == pytest.approx(1 / 64)
        assert analytic_bound("forge_partial_key", small_config, t=1) == pytest.approx(1 / 4)
        assert analytic_bound("dispute_fabrication", small_config, delta=0.5) == pytest.approx(
            1 - (0.625 ** 2))
        assert analytic_bound("tamper_signature", small_config) is None


class TestSubstitute:
    def test_backdoor_control_is_accepted(self, small_config):
        session = ProtocolSession(small_config)
        outcome = attack_substitute_state(session, RandomStream(3), backdoor=True)
        assert outcome.forged_accepted
        assert not outcome.detected
        audit = outcome.knowledge.audit()
        assert "debug_backdoor" in audit["sources"]
        assert not audit["only_allowed_sources"]

    def test_backdoor_payload_decrypts_under_alice_pad(self, small_config):
        session = ProtocolSession(small_config)
        eve = StateVector.from_label("1")
        outcome = attack_substitute_state(session, RandomStream(4), eve_state=eve,
                                          x_E=QotpKey((0, 0)), backdoor=True)
        assert outcome.forged_accepted
        expected = qcrypto.qotp_decrypt(eve, session.alice.x)
        assert fidelity(session.verdict.recovered_state, expected) == pytest.approx(1.0)

    def test_blind_substitution_is_caught_by_bob(self, make_config):
        reasons = set()
        for seed in range(20):
            session = ProtocolSession(make_config(master_seed=seed))
            outcome = attack_substitute_state(session, RandomStream(seed))
            audit = outcome.knowledge.audit()
            assert audit["only_allowed_sources"]
            assert audit["intercepted"] == 1
            if outcome.detected:
                reasons.add(outcome.reason)
        assert reasons <= {VerdictReason.SYNDROME_MISMATCH, VerdictReason.DECODE_FAILURE}

    def test_rate_matches_bound(self, small_config):
        trials = 600
        estimate = estimate_forgery_success(small_config, "substitute_state", trials, RandomStream(21))
        bound = estimate.analytic_bound
        assert abs(estimate.rate - bound) <= 4 * binomial_sigma(bound, trials)
        assert estimate.wilson_low <= estimate.rate <= estimate.wilson_high


class TestForge:
    def test_leak_stays_within_budget(self, small_config):
        session = ProtocolSession(small_config)
        outcome = attack_forge_with_partial_key(session, 0, RandomStream(9))
        audit = outcome.knowledge.audit()
        assert audit["budget_bits"] == 0
        assert audit["max_revealed_per_key"] == 0
        assert audit["within_budget"]
        assert audit["only_allowed_sources"]
        assert not outcome.boundary_case

    def test_boundary_flag(self, small_config):
        session = ProtocolSession(small_config)
        outcome = attack_forge_with_partial_key(session, 1, RandomStream(9))
        assert outcome.boundary_case
        assert outcome.knowledge.audit()["max_revealed_per_key"] == small_config.w
        assert session.registry.get_statistics()["adversary_copies"] == small_config.num_blocks

    def test_no_leak_stays_below_bound(self, small_config):
        trials = 400
        estimate = estimate_forgery_success(small_config, "forge_partial_key", trials, RandomStream(5), t=0)
        assert estimate.rate <= estimate.analytic_bound + 4 * binomial_sigma(estimate.analytic_bound, trials)

    def test_full_leak_succeeds_when_x_is_guessed(self, small_config):
        trials = 400
        estimate = estimate_forgery_success(small_config, "forge_partial_key", trials, RandomStream(6), t=1)
        assert estimate.boundary_case
        assert abs(estimate.rate - 0.25) <= 4 * binomial_sigma(0.25, trials)
        assert estimate.swap_accept_rate >= estimate.rate


class TestTamper:
    def test_outcome_is_consistent(self, make_config):
        for seed in range(5):
            session = ProtocolSession(make_config(master_seed=seed))
            outcome = attack_tamper_signature(session, RandomStream(seed))
            assert outcome.detected != outcome.forged_accepted
            assert outcome.knowledge.audit()["intercepted"] == 2

    def test_signature_tampering_is_caught_by_swap_tests(self, make_config):
        trials = 40
        stages = []
        for seed in range(trials):
            session = ProtocolSession(make_config(master_seed=seed))
            outcome = attack_tamper_signature(session, RandomStream(seed))
            if outcome.detected:
                stages.append(outcome.stage_detected)
        assert set(stages) <= {"trent:ArbitratorAbort", "bob:SignatureMismatch"}
        assert len(stages) >= 36


class TestSimulateTrial:
    def test_honest_trial(self, small_config):
        assert simulate_trial("honest", small_config).success

    def test_repudiation_trial(self, small_config):
        result = simulate_trial("dispute_repudiation", small_config)
        assert result.success
        assert result.stage == "AliceCheating"

    def test_unknown_strategy(self, small_config):
        with pytest.raises(ValueError):
            simulate_trial("bribery", small_config)

    def test_deterministic(self, make_config):
        config = make_config(master_seed=77)
        first = simulate_trial("substitute_state", config)
        second = simulate_trial("substitute_state", config)
        assert first == second

    def test_estimate_rejects_zero_trials(self, small_config):
        with pytest.raises(ValueError):
            estimate_forgery_success(small_config, "honest", 0, RandomStream(0))
