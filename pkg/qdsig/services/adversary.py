# qdsig/services/adversary.py
"""
Adversary strategies against a ProtocolSession.

Eve acts only through channel taps and the metered public-key registry. Her
key knowledge follows the Holevo cap: t measured copies of |y_{i,j}> reveal at
most t*ceil(log2 m) bits of u_{i,j}; the model hands her exactly that many
uniformly placed bits, which over-approximates any concrete measurement.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from qdsig.core.dependencies import get_code_for
from qdsig.models.codes import Syndrome
from qdsig.models.keys import DerivedX, KeyIndex, QotpKey, SecretKey
from qdsig.models.messages import (
    DisputeOutcome, MessageKind, Party, ProtocolMessage, Verdict, VerdictReason,
)
from qdsig.models.quantum import StateVector
from qdsig.models.schemas import STRATEGIES, SessionConfig
from qdsig.services import qcrypto, stabilizer
from qdsig.services.fingerprint import fingerprint, fingerprint_qubits
from qdsig.services.protocol import ProtocolSession, run_dispute_scenario
from qdsig.services.quantum_core import random_state
from qdsig.utils.random_stream import RandomStream, derive_seed
from qdsig.utils.stats import wilson_interval

logger = logging.getLogger(__name__)

ALLOWED_SOURCES = frozenset({"channel", "registry"})


def holevo_budget(t: int, m: int) -> int:
    """t * ceil(log2 m) bits"""
    if t < 0 or m < 1:
        raise ValueError("holevo_budget needs t >= 0 and m >= 1")
    return t * (m - 1).bit_length()


@dataclass
class AdversaryKnowledge:
    """Everything Eve has seen, with where it came from"""
    t: int = 0
    budget_bits: int = 0
    intercepted: List[ProtocolMessage] = field(default_factory=list)
    revealed: Dict[KeyIndex, Dict[int, int]] = field(default_factory=dict)
    claims: Dict[str, Any] = field(default_factory=dict)
    sources: List[str] = field(default_factory=list)

    def observe(self, message: ProtocolMessage):
        self.intercepted.append(message)
        self.sources.append("channel")

    def learn(self, index: KeyIndex, bits: Dict[int, int]):
        known = self.revealed.setdefault(index, {})
        known.update(bits)
        self.sources.append("registry")

    @property
    def revealed_bits_per_key(self) -> Dict[KeyIndex, int]:
        return {idx: len(bits) for idx, bits in self.revealed.items()}

    def audit(self) -> Dict[str, Any]:
        """Information-flow record: sources touched and the per-key leak against the cap"""
        per_key = self.revealed_bits_per_key
        used = sorted(set(self.sources))
        return {
            "sources": used,
            "only_allowed_sources": set(used) <= ALLOWED_SOURCES,
            "max_revealed_per_key": max(per_key.values(), default=0),
            "budget_bits": self.budget_bits,
            "within_budget": all(n <= self.budget_bits for n in per_key.values()),
            "intercepted": len(self.intercepted),
        }


@dataclass
class AttackOutcome:
    detected: bool
    stage_detected: Optional[str]
    forged_accepted: bool
    swap_accepted: bool = False
    reason: VerdictReason = VerdictReason.ACCEPTED
    e_count: int = 0
    boundary_case: bool = False
    knowledge: Optional[AdversaryKnowledge] = None


def _stage(verdict: Verdict) -> str:
    return f"{verdict.party.value.lower()}:{verdict.reason.value}"


def _outcome(verdict: Verdict, forged_accepted: bool, knowledge: AdversaryKnowledge,
             boundary_case: bool = False) -> AttackOutcome:
    if forged_accepted:
        stage = None
    elif verdict.accepted:
        # accepted by swap tests, caught only by the exact amplitude comparison
        stage = "exact_check"
    else:
        stage = _stage(verdict)
    return AttackOutcome(
        detected=not forged_accepted,
        stage_detected=stage,
        forged_accepted=forged_accepted,
        swap_accepted=verdict.accepted,
        reason=verdict.reason,
        e_count=verdict.e_count,
        boundary_case=boundary_case,
        knowledge=knowledge,
    )


def attack_substitute_state(session: ProtocolSession, rng: RandomStream,
                            eve_state: Optional[StateVector] = None,
                            x_E: Optional[QotpKey] = None,
                            backdoor: bool = False) -> AttackOutcome:
    """Replace π on the Alice->Bob channel

    Without the backdoor Eve sends qotp_encrypt(eve_state, x_E) over all 5·n_msg
    physical qubits, knowing nothing of (k, s). With backdoor=True she is handed
    Alice's (k, s) and encodes an n_msg-qubit eve_state properly (control run).
    """
    cfg = session.config
    knowledge = AdversaryKnowledge()
    if backdoor:
        eve_state = eve_state or random_state(cfg.n_msg, rng)
        x_E = x_E or QotpKey(rng.bits(2 * eve_state.num_qubits))

        def replace(message: ProtocolMessage) -> ProtocolMessage:
            knowledge.observe(message)
            knowledge.sources.append("debug_backdoor")
            code = stabilizer.derive_code(session.alice.k_fam)
            encoded = stabilizer.encode_blocks(code, qcrypto.qotp_encrypt(eve_state, x_E))
            return message.with_states((stabilizer.apply_offsets(code, encoded, session.alice.s),))
    else:
        physical = 5 * cfg.n_msg
        eve_state = eve_state or random_state(physical, rng)
        x_E = x_E or QotpKey(rng.bits(2 * eve_state.num_qubits))
        tau = qcrypto.qotp_encrypt(eve_state, x_E)

        def replace(message: ProtocolMessage) -> ProtocolMessage:
            knowledge.observe(message)
            return message.with_states((tau,))

    session.channel.add_tap(replace, sender=Party.ALICE, receiver=Party.BOB,
                            kind=MessageKind.QUANTUM_PAYLOAD)
    verdict = session.run()
    return _outcome(verdict, verdict.accepted, knowledge)


def attack_forge_with_partial_key(session: ProtocolSession, t: int, rng: RandomStream) -> AttackOutcome:
    """Guess X, rebuild the selected secrets from leaked + guessed bits, substitute Σ everywhere"""
    cfg = session.config
    code = session.setup.code
    budget = holevo_budget(t, code.m)
    knowledge = AdversaryKnowledge(t=t, budget_bits=budget)
    boundary = budget >= code.w

    x_guess = DerivedX(rng.bits(cfg.num_blocks))
    forged = []
    for i in range(1, cfg.num_blocks + 1):
        j = x_guess.bits[i - 1]
        leaked = session.registry.measure_copies(i, j, t, budget, rng)
        knowledge.learn((i, j), leaked)
        guess = rng.bits(code.w)
        u_prime = SecretKey(tuple(leaked.get(p, guess[p]) for p in range(code.w)))
        forged.append(fingerprint(code, u_prime, cfg.fingerprint_form))
    forged_signature = tuple(forged)

    s_claim = Syndrome(rng.bits(cfg.syndrome_bits))
    x_claim = qcrypto.recover_x(x_guess, s_claim.bits[:cfg.s_used_bits])
    knowledge.claims = {"X": x_guess.bits, "s": s_claim.bits, "x": x_claim.bits}

    def substitute(message: ProtocolMessage) -> ProtocolMessage:
        knowledge.observe(message)
        return message.with_states(forged_signature + forged_signature)

    for receiver in (Party.BOB, Party.TRENT):
        session.channel.add_tap(substitute, sender=Party.ALICE, receiver=receiver,
                                kind=MessageKind.SIGNATURE_COPIES)
    verdict = session.run()
    forged_accepted = verdict.accepted and verdict.exact_match
    if boundary:
        logger.debug(f"Forgery with t={t}: leak of {budget} bits covers w={code.w}")
    return _outcome(verdict, forged_accepted, knowledge, boundary_case=boundary)


def attack_tamper_signature(session: ProtocolSession, rng: RandomStream) -> AttackOutcome:
    """Replace every Σ block on both channels with an independent random state; π untouched"""
    cfg = session.config
    knowledge = AdversaryKnowledge()
    block_qubits = fingerprint_qubits(session.setup.code, cfg.fingerprint_form)

    def tamper(message: ProtocolMessage) -> ProtocolMessage:
        knowledge.observe(message)
        return message.with_states(tuple(random_state(block_qubits, rng)
                                         for _ in range(len(message.states))))

    for receiver in (Party.BOB, Party.TRENT):
        session.channel.add_tap(tamper, sender=Party.ALICE, receiver=receiver,
                                kind=MessageKind.SIGNATURE_COPIES)
    verdict = session.run()
    return _outcome(verdict, verdict.accepted, knowledge)


def analytic_bound(strategy: str, config: SessionConfig, t: int = 0,
                   delta: Optional[float] = None) -> Optional[float]:
    """Reference value per strategy: expected rate, upper bound or detection floor"""
    n = config.n_msg
    if strategy in ("honest", "dispute_repudiation"):
        return 1.0
    if strategy == "substitute_state":
        return 2.0 ** (-4 * n)
    if strategy == "forge_partial_key":
        leak = min(holevo_budget(t, config.m), config.w)
        return 2.0 ** (-((config.w - leak) + 2 * n))
    if strategy == "dispute_fabrication" and delta is not None:
        return 1.0 - ((1.0 + delta ** 2) / 2.0) ** (2 * n)
    return None


@dataclass
class TrialResult:
    success: bool
    swap_accepted: bool = False
    stage: Optional[str] = None
    boundary_case: bool = False


def simulate_trial(strategy: str, config: SessionConfig, t: int = 0) -> TrialResult:
    """One independent trial; all randomness comes from config.master_seed"""
    if strategy not in STRATEGIES:
        raise ValueError(f"Unknown strategy '{strategy}'")

    if strategy in ("dispute_repudiation", "dispute_fabrication"):
        scenario = "repudiation" if strategy == "dispute_repudiation" else "fabrication"
        verdict, _ = run_dispute_scenario(config, scenario)
        wanted = (DisputeOutcome.ALICE_CHEATING if scenario == "repudiation"
                  else DisputeOutcome.FORGED_BY_BOB_OR_OTHER)
        return TrialResult(success=verdict.outcome == wanted, stage=verdict.outcome.value)

    session = ProtocolSession(config)
    rng = session.master.spawn("adversary")
    if strategy == "honest":
        verdict = session.run()
        fid = session.recovered_fidelity()
        ok = verdict.accepted and verdict.e_count == 0 and fid is not None and fid >= 1.0 - 1e-10
        return TrialResult(success=ok, swap_accepted=verdict.accepted,
                           stage=None if verdict.accepted else _stage(verdict))
    if strategy == "substitute_state":
        outcome = attack_substitute_state(session, rng)
    elif strategy == "forge_partial_key":
        outcome = attack_forge_with_partial_key(session, t, rng)
    else:
        outcome = attack_tamper_signature(session, rng)
    return TrialResult(success=outcome.forged_accepted, swap_accepted=outcome.swap_accepted,
                       stage=outcome.stage_detected, boundary_case=outcome.boundary_case)


def trial_config(config: SessionConfig, trial_seed: int) -> SessionConfig:
    """Same cell, fresh session randomness, shared fingerprint code"""
    return config.model_copy(update={"master_seed": trial_seed,
                                     "code_seed": config.effective_code_seed})


@dataclass
class ForgeryEstimate:
    strategy: str
    trials: int
    successes: int
    rate: float
    wilson_low: float
    wilson_high: float
    analytic_bound: Optional[float]
    swap_accept_rate: float
    boundary_case: bool = False
    stages: Dict[str, int] = field(default_factory=dict)


def estimate_forgery_success(config: SessionConfig, strategy: str, trials: int,
                             rng: RandomStream, t: int = 0) -> ForgeryEstimate:
    """Sequential Monte Carlo over independently seeded sessions"""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    successes = 0
    swap_accepts = 0
    boundary = False
    stages: Dict[str, int] = {}
    for index in range(trials):
        seed = derive_seed(rng.seed, f"trial:{index}")
        result = simulate_trial(strategy, trial_config(config, seed), t)
        successes += int(result.success)
        swap_accepts += int(result.swap_accepted)
        boundary = boundary or result.boundary_case
        if result.stage:
            stages[result.stage] = stages.get(result.stage, 0) + 1
    low, high = wilson_interval(successes, trials)
    delta = get_code_for(config).delta
    return ForgeryEstimate(
        strategy=strategy,
        trials=trials,
        successes=successes,
        rate=successes / trials,
        wilson_low=low,
        wilson_high=high,
        analytic_bound=analytic_bound(strategy, config, t, delta),
        swap_accept_rate=swap_accepts / trials,
        boundary_case=boundary,
        stages=dict(sorted(stages.items())),
    )
