# qdsig/services/protocol.py
"""
Three-party signing session: key setup, signing, arbitrated verification and
dispute resolution, all over an inspectable Channel.

An honest session delivers seven messages in this order:
  Alice->Bob QuantumPayload, Alice->Bob SignatureCopies, Alice->Trent C1,
  Alice->Trent SignatureCopies, Trent->Bob C2, Bob->Trent C3, Trent->Bob C4.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from qdsig.core.config import settings
from qdsig.core.dependencies import get_code_for
from qdsig.core.exceptions import ProtocolAbort
from qdsig.models.codes import CodeSpec, Syndrome
from qdsig.models.keys import ClassicalKey, KeyPairSet
from qdsig.models.messages import (
    DisputeOutcome, DisputeVerdict, MessageKind, Party, ProtocolMessage, SessionTranscript,
    TrentEvidence, Verdict, VerdictReason,
)
from qdsig.models.quantum import Signature, StateVector
from qdsig.models.schemas import SessionConfig
from qdsig.services import qcrypto
from qdsig.services.channel import Channel
from qdsig.services.fingerprint import generate_keypairs
from qdsig.services.parties import Alice, Bob, Trent, trent_release
from qdsig.services.public_registry import PublicKeyRegistry
from qdsig.services.quantum_core import fidelity, random_state, swap_test
from qdsig.utils.bits import int_to_bits
from qdsig.utils.random_stream import RandomStream

logger = logging.getLogger(__name__)

HONEST_MESSAGE_COUNT = 7
DISPUTE_OUTCOME_CODES = {
    DisputeOutcome.ALICE_CHEATING: 0,
    DisputeOutcome.FORGED_BY_BOB_OR_OTHER: 1,
    DisputeOutcome.UNRESOLVABLE: 2,
}


@dataclass
class SharedKeys:
    """Pre-shared one-time keys; each party gets its own copy of the ones it holds"""
    k_at: ClassicalKey
    k_ab: ClassicalKey
    k_tb: ClassicalKey


@dataclass(eq=False)
class SessionSetup:
    keys: SharedKeys
    keypairs: KeyPairSet
    registry: PublicKeyRegistry
    code: CodeSpec


def key_budget(config: SessionConfig) -> Dict[str, int]:
    """Bits each shared key needs: exactly C1..C4 plus the configured reserve"""
    k_bits = settings.CODE_FAMILY_KEY_BITS
    x_bits = 2 * config.n_msg
    s_bits = config.syndrome_bits
    reserve = config.key_reserve_bits
    return {
        "K_AT": qcrypto.c1_length(s_bits, k_bits, x_bits) + reserve,
        "K_AB": reserve,
        "K_TB": (qcrypto.c2_length(k_bits, x_bits)
                 + 2 * qcrypto.syndrome_message_length(s_bits) + reserve),
    }


def setup_keys(config: SessionConfig, code: Optional[CodeSpec] = None) -> SessionSetup:
    """Draw K_AT, K_AB, K_TB and Alice's key pairs from master_seed-derived streams"""
    code = code or get_code_for(config)
    master = RandomStream(config.master_seed)
    budget = key_budget(config)
    keys = SharedKeys(
        k_at=ClassicalKey("K_AT", master.spawn("K_AT").bits(budget["K_AT"])),
        k_ab=ClassicalKey("K_AB", master.spawn("K_AB").bits(budget["K_AB"])),
        k_tb=ClassicalKey("K_TB", master.spawn("K_TB").bits(budget["K_TB"])),
    )
    keypairs = generate_keypairs(config.n_msg, code, master.spawn("keypairs"), config.fingerprint_form)
    return SessionSetup(keys=keys, keypairs=keypairs, registry=PublicKeyRegistry(keypairs), code=code)


class ProtocolSession:
    """One session: parties, their key copies, the channel and the transcript"""

    def __init__(self, config: SessionConfig, setup: Optional[SessionSetup] = None,
                 message: Optional[StateVector] = None):
        self.config = config
        self.master = RandomStream(config.master_seed)
        self.setup = setup or setup_keys(config)
        self.registry = self.setup.registry
        self.message = message or random_state(config.n_msg, self.master.spawn("message"))
        self.transcript = SessionTranscript(seq_num=config.seq_num)
        self.channel = Channel(self.transcript)

        keys = self.setup.keys
        self.alice = Alice(config, self.setup.keypairs, keys.k_at.copy(),
                           self.master.spawn("alice"), self.transcript)
        self.trent = Trent(config, keys.k_at.copy(), keys.k_tb.copy(), self.registry,
                           self.master.spawn("trent"), self.transcript)
        self.bob = Bob(config, keys.k_tb.copy(), self.registry,
                       self.master.spawn("bob"), self.transcript)
        self.verdict: Optional[Verdict] = None

    def alice_sign(self) -> Tuple[List[ProtocolMessage], List[ProtocolMessage]]:
        to_bob, to_trent = self.alice.sign(self.message)
        self.channel.send_all(to_bob + to_trent)
        return to_bob, to_trent

    def trent_verify(self) -> ProtocolMessage:
        return self.channel.send(self.trent.verify(self.channel.inbox(Party.TRENT)))

    def bob_receive_and_challenge(self) -> ProtocolMessage:
        return self.channel.send(self.bob.receive_and_challenge(self.channel.inbox(Party.BOB)))

    def trent_release(self) -> ProtocolMessage:
        return self.channel.send(self.trent.release(self.channel.inbox(Party.TRENT)))

    def bob_finalize(self) -> Verdict:
        return self.bob.finalize(self.channel.inbox(Party.BOB))

    def run(self) -> Verdict:
        """Drive all four steps; aborts become rejecting Verdicts"""
        try:
            self.alice_sign()
            self.trent_verify()
            self.bob_receive_and_challenge()
            self.trent_release()
            self.verdict = self.bob_finalize()
        except ProtocolAbort as e:
            reason = e.reason if isinstance(e.reason, VerdictReason) else VerdictReason.MALFORMED_MESSAGE
            self.verdict = Verdict(accepted=False, e_count=int(e.details.get("e_count", 0)),
                                   reason=reason, party=Party(e.party or Party.BOB.value),
                                   detail=e.message)
            logger.debug(f"Session {self.config.seq_num} rejected by {e.party}: {reason.value}")
        return self.verdict

    @property
    def evidence(self) -> Optional[TrentEvidence]:
        return self.trent.evidence

    def recovered_fidelity(self) -> Optional[float]:
        if self.verdict is None or self.verdict.recovered_state is None:
            return None
        return fidelity(self.verdict.recovered_state, self.message)

    def summary(self) -> Dict[str, Any]:
        """Decision log and key bookkeeping; kept out of the message transcript"""
        verdict = self.verdict.to_dict() if self.verdict else None
        key_usage = {
            "K_AT": {"consumed_by_alice": self.alice.k_at.consumed,
                     "consumed_by_trent": self.trent.k_at.consumed},
            "K_TB": {"consumed_by_trent": self.trent.k_tb.consumed,
                     "consumed_by_bob": self.bob.k_tb.consumed},
            "K_AB": {"length": len(self.setup.keys.k_ab), "unused": True},
        }
        return {
            "seq_num": self.config.seq_num,
            "config": self.config.model_dump(),
            "verdict": verdict,
            "recovered_fidelity": self.recovered_fidelity(),
            "decisions": list(self.transcript.decisions),
            "keys": key_usage,
            "registry": self.registry.get_statistics(),
            "message_count": len(self.transcript),
        }


def run_session(config: SessionConfig, setup: Optional[SessionSetup] = None) -> ProtocolSession:
    session = ProtocolSession(config, setup)
    session.run()
    return session


def run_honest_session(config: SessionConfig) -> Tuple[SessionTranscript, Verdict]:
    session = run_session(config)
    return session.transcript, session.verdict


def transcript_records(transcript: SessionTranscript) -> List[Dict[str, Any]]:
    return [message.to_dict() for message in transcript.messages]


def replay_transcript(config: SessionConfig, records: Sequence[Dict[str, Any]]) -> bool:
    """Re-run the session from (config, master_seed) and compare message by message"""
    live = transcript_records(run_session(config).transcript)
    if len(live) != len(records):
        logger.warning(f"Replay produced {len(live)} messages, transcript has {len(records)}")
        return False
    for index, (expected, actual) in enumerate(zip(records, live)):
        if expected != actual:
            logger.warning(f"Replay diverges at message {index} ({actual.get('kind')})")
            return False
    return True


def resolve_dispute(bob_copy: Optional[Signature], bob_s: Optional[Syndrome],
                    evidence: Optional[TrentEvidence], registry: PublicKeyRegistry,
                    rng: RandomStream, repetitions: int = 1) -> DisputeVerdict:
    """Trent compares Bob's Σ-copy and s_B with what he retained"""
    if evidence is None or bob_copy is None or bob_s is None:
        return DisputeVerdict(outcome=DisputeOutcome.UNRESOLVABLE)
    retained = evidence.retained_copy
    if len(bob_copy) != len(retained):
        return DisputeVerdict(outcome=DisputeOutcome.FORGED_BY_BOB_OR_OTHER, failed_blocks=len(retained),
                              syndrome_match=bob_s == evidence.s_T)

    regenerated = registry.signature_for(
        qcrypto.derive_X(evidence.x_T, evidence.s_T.bits[:len(evidence.x_T)]))
    failed = 0
    for presented, kept, ref in zip(bob_copy, retained, regenerated):
        if presented.num_qubits != kept.num_qubits:
            failed += 1
            continue
        passed_kept = swap_test(presented, kept, rng, repetitions)
        passed_ref = swap_test(presented, ref, rng, repetitions)
        if not (passed_kept and passed_ref):
            failed += 1
    syndrome_match = bob_s == evidence.s_T
    if failed == 0 and syndrome_match:
        outcome = DisputeOutcome.ALICE_CHEATING
    else:
        outcome = DisputeOutcome.FORGED_BY_BOB_OR_OTHER
    return DisputeVerdict(outcome=outcome, failed_blocks=failed, syndrome_match=syndrome_match)


DISPUTE_SCENARIOS = ("repudiation", "fabrication")


def run_dispute_scenario(config: SessionConfig, scenario: str,
                         setup: Optional[SessionSetup] = None) -> Tuple[DisputeVerdict, ProtocolSession]:
    """Honest session, then Alice denies it; Bob presents his copy or a fabricated one"""
    if scenario not in DISPUTE_SCENARIOS:
        raise ValueError(f"Unknown dispute scenario '{scenario}'")
    session = run_session(config, setup)
    held = session.bob.held
    if not session.verdict.accepted or held is None:
        return DisputeVerdict(outcome=DisputeOutcome.UNRESOLVABLE), session

    rng = session.master.spawn("dispute")
    if scenario == "repudiation":
        presented = held.copy_1
    else:
        presented = tuple(random_state(block.num_qubits, rng) for block in held.copy_1)

    seq = config.seq_num
    session.channel.send(ProtocolMessage(seq, Party.BOB, Party.TRENT, MessageKind.DISPUTE_REQUEST,
                                         bits=held.s_B.bits, states=presented))
    verdict = resolve_dispute(presented, held.s_B, session.evidence, session.registry, rng,
                              config.swap_repetitions)
    session.channel.send(ProtocolMessage(seq, Party.TRENT, Party.BOB, MessageKind.DISPUTE_VERDICT,
                                         bits=int_to_bits(DISPUTE_OUTCOME_CODES[verdict.outcome], 2)))
    session.transcript.log_decision(Party.TRENT, "dispute", **verdict.to_dict())
    return verdict, session
