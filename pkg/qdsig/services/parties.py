# qdsig/services/parties.py
"""
Party state machines for one signing session.

Every party consumes its inbox strictly in protocol order; a call made in the
wrong state, or a missing/mismatched message, raises ProtocolAbort carrying a
VerdictReason. Classical keys are per-party copies consumed in lockstep:
K_AT by C1; K_TB by C2, C3, C4 in that order.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from qdsig.core.config import settings
from qdsig.core.exceptions import (
    DecodeError, KeyExhaustedError, KeyLengthError, ProtocolAbort, QuantumStateError,
)
from qdsig.models.codes import CodeFamilyKey, Syndrome
from qdsig.models.keys import ClassicalKey, DerivedX, KeyPairSet, QotpKey
from qdsig.models.messages import (
    MessageKind, Party, ProtocolMessage, SessionTranscript, TrentEvidence, Verdict, VerdictReason,
)
from qdsig.models.quantum import Signature, StateVector
from qdsig.models.schemas import SessionConfig
from qdsig.services import qcrypto, stabilizer
from qdsig.services.public_registry import PublicKeyRegistry
from qdsig.services.quantum_core import swap_test
from qdsig.utils.random_stream import RandomStream

logger = logging.getLogger(__name__)


class PartyState(str, Enum):
    READY = "ready"
    SIGNED = "signed"
    VERIFIED = "verified"
    CHALLENGED = "challenged"
    RELEASED = "released"
    FINALIZED = "finalized"
    ABORTED = "aborted"


def find_message(inbox: Sequence[ProtocolMessage], kind: MessageKind, sender: Party,
                 seq_num: int, party: Party) -> ProtocolMessage:
    for message in inbox:
        if message.kind == kind and message.sender == sender and message.seq_num == seq_num:
            return message
    raise ProtocolAbort(f"{party.value} is missing {kind.value} from {sender.value} for seq {seq_num}",
                        reason=VerdictReason.MALFORMED_MESSAGE, party=party.value)


def split_copies(message: ProtocolMessage, num_blocks: int, party: Party) -> Tuple[Signature, Signature]:
    """A SignatureCopies message carries two copies of Σ, block by block"""
    if len(message.states) != 2 * num_blocks:
        raise ProtocolAbort(f"{party.value} expected {2 * num_blocks} signature blocks, "
                            f"got {len(message.states)}",
                            reason=VerdictReason.MALFORMED_MESSAGE, party=party.value)
    return tuple(message.states[:num_blocks]), tuple(message.states[num_blocks:])


def check_cipher_length(message: ProtocolMessage, expected: int) -> None:
    if len(message.bits) != expected:
        raise KeyLengthError(f"{message.kind.value} has {len(message.bits)} bits, expected {expected}",
                             field=message.kind.value, expected=expected, actual=len(message.bits))


def _block_passes(a: StateVector, b: StateVector, rng: RandomStream, repetitions: int) -> bool:
    if a.num_qubits != b.num_qubits:
        return False
    return swap_test(a, b, rng, repetitions)


def failed_blocks(copy_1: Signature, copy_2: Signature, reference: Signature,
                  rng: RandomStream, repetitions: int) -> List[int]:
    """Blocks failing copy-vs-copy or either copy-vs-reference swap test"""
    failed = []
    for b, (a, c, ref) in enumerate(zip(copy_1, copy_2, reference)):
        checks = (
            _block_passes(a, c, rng, repetitions),
            _block_passes(a, ref, rng, repetitions),
            _block_passes(c, ref, rng, repetitions),
        )
        if not all(checks):
            failed.append(b)
    return failed


def trent_release(seq_num: int, s_T: Syndrome, k_tb: ClassicalKey) -> ProtocolMessage:
    """C4 = s_T under fresh K_TB bits"""
    c4 = qcrypto.otp_encrypt(k_tb, qcrypto.encode_syndrome_message(s_T), purpose="C4")
    return ProtocolMessage(seq_num, Party.TRENT, Party.BOB, MessageKind.C4, bits=c4)


def exact_signature_match(copies: Sequence[Signature], reference: Signature) -> bool:
    """Every copy equals the regenerated signature block by block (global phase ignored)"""
    for copy in copies:
        for a, ref in zip(copy, reference):
            if not a.equals_up_to_phase(ref, tol=1e-9):
                return False
    return True


class Alice:
    """Signer: holds the key pairs and K_AT"""

    def __init__(self, config: SessionConfig, keys: KeyPairSet, k_at: ClassicalKey,
                 rng: RandomStream, transcript: SessionTranscript):
        self.config = config
        self.keys = keys
        self.k_at = k_at
        self.rng = rng
        self.transcript = transcript
        self.state = PartyState.READY
        self.x: Optional[QotpKey] = None
        self.k_fam: Optional[CodeFamilyKey] = None
        self.s: Optional[Syndrome] = None
        self.X: Optional[DerivedX] = None
        self.signature: Optional[Signature] = None

    def sign(self, message: StateVector) -> Tuple[List[ProtocolMessage], List[ProtocolMessage]]:
        if self.state != PartyState.READY:
            raise ProtocolAbort("Alice signs once per session", reason=VerdictReason.MALFORMED_MESSAGE,
                                party=Party.ALICE.value)
        cfg = self.config
        if message.num_qubits != cfg.n_msg:
            raise QuantumStateError("Message size does not match n_msg",
                                    expected=cfg.n_msg, actual=message.num_qubits)

        self.x = QotpKey(self.rng.bits(2 * cfg.n_msg))
        self.k_fam = CodeFamilyKey(self.rng.bits(settings.CODE_FAMILY_KEY_BITS))
        self.s = Syndrome(self.rng.bits(cfg.syndrome_bits))

        rho = qcrypto.qotp_encrypt(message, self.x)
        code = stabilizer.derive_code(self.k_fam)
        pi = stabilizer.apply_offsets(code, stabilizer.encode_blocks(code, rho), self.s)

        self.X = qcrypto.derive_X(self.x, self.s.bits[:cfg.s_used_bits])
        self.signature = tuple(self.keys.public(i, self.X.bits[i - 1])
                               for i in range(1, cfg.num_blocks + 1))
        copies = self.signature + self.signature

        c1 = qcrypto.otp_encrypt(self.k_at, qcrypto.encode_c1(cfg.seq_num, self.s, self.k_fam, self.x),
                                 purpose="C1")
        seq = cfg.seq_num
        to_bob = [
            ProtocolMessage(seq, Party.ALICE, Party.BOB, MessageKind.QUANTUM_PAYLOAD, states=(pi,)),
            ProtocolMessage(seq, Party.ALICE, Party.BOB, MessageKind.SIGNATURE_COPIES, states=copies),
        ]
        to_trent = [
            ProtocolMessage(seq, Party.ALICE, Party.TRENT, MessageKind.C1, bits=c1),
            ProtocolMessage(seq, Party.ALICE, Party.TRENT, MessageKind.SIGNATURE_COPIES, states=copies),
        ]
        self.state = PartyState.SIGNED
        self.transcript.log_decision(Party.ALICE, "signed", blocks=cfg.num_blocks)
        return to_bob, to_trent


class Trent:
    """Arbitrator: checks Σ against C1, relays (k, x) to Bob, keeps dispute evidence"""

    def __init__(self, config: SessionConfig, k_at: ClassicalKey, k_tb: ClassicalKey,
                 registry: PublicKeyRegistry, rng: RandomStream, transcript: SessionTranscript):
        self.config = config
        self.k_at = k_at
        self.k_tb = k_tb
        self.registry = registry
        self.rng = rng
        self.transcript = transcript
        self.state = PartyState.READY
        self.e_count = 0
        self.evidence: Optional[TrentEvidence] = None
        self.s_B: Optional[Syndrome] = None

    def _abort(self, message: str, reason: VerdictReason) -> ProtocolAbort:
        self.state = PartyState.ABORTED
        self.transcript.log_decision(Party.TRENT, "abort", reason=reason.value, e_count=self.e_count)
        logger.debug(f"Trent aborts seq {self.config.seq_num}: {message}")
        return ProtocolAbort(message, reason=reason, party=Party.TRENT.value,
                             details={"e_count": self.e_count})

    def verify(self, inbox: Sequence[ProtocolMessage]) -> ProtocolMessage:
        if self.state != PartyState.READY:
            raise self._abort("verify called out of order", VerdictReason.MALFORMED_MESSAGE)
        cfg = self.config
        try:
            c1 = find_message(inbox, MessageKind.C1, Party.ALICE, cfg.seq_num, Party.TRENT)
            copies_msg = find_message(inbox, MessageKind.SIGNATURE_COPIES, Party.ALICE,
                                      cfg.seq_num, Party.TRENT)
            copy_a, copy_b = split_copies(copies_msg, cfg.num_blocks, Party.TRENT)
        except ProtocolAbort as e:
            raise self._abort(e.message, VerdictReason.MALFORMED_MESSAGE)

        try:
            check_cipher_length(c1, qcrypto.c1_length(cfg.syndrome_bits, settings.CODE_FAMILY_KEY_BITS,
                                                      2 * cfg.n_msg))
            plain = qcrypto.otp_decrypt(self.k_at, c1.bits, purpose="C1")
            seq, s_t, k_t, x_t = qcrypto.decode_c1(plain)
            if seq != cfg.seq_num:
                raise KeyLengthError("C1 carries a foreign sequence number", field="seq_num")
            if len(s_t) != cfg.syndrome_bits or len(x_t) != 2 * cfg.n_msg:
                raise KeyLengthError("C1 field lengths do not match the session", field="C1")
            reference = self.registry.signature_for(qcrypto.derive_X(x_t, s_t.bits[:cfg.s_used_bits]))
        except (KeyLengthError, KeyExhaustedError) as e:
            raise self._abort(f"C1 rejected: {e.message}", VerdictReason.MALFORMED_MESSAGE)

        failed = failed_blocks(copy_a, copy_b, reference, self.rng, cfg.swap_repetitions)
        self.e_count = len(failed)
        if self.e_count > cfg.max_failed_blocks:
            raise self._abort(f"{self.e_count} signature blocks failed", VerdictReason.ARBITRATOR_ABORT)

        self.evidence = TrentEvidence(seq_num=cfg.seq_num, retained_copy=copy_b,
                                      s_T=s_t, k_T=k_t, x_T=x_t)
        c2 = qcrypto.otp_encrypt(self.k_tb, qcrypto.encode_c2(k_t, x_t), purpose="C2")
        self.state = PartyState.VERIFIED
        self.transcript.log_decision(Party.TRENT, "proceed", e_count=self.e_count)
        return ProtocolMessage(cfg.seq_num, Party.TRENT, Party.BOB, MessageKind.C2, bits=c2)

    def release(self, inbox: Sequence[ProtocolMessage]) -> ProtocolMessage:
        """Read Bob's s_B, answer with C4 = s_T under fresh K_TB bits"""
        if self.state != PartyState.VERIFIED or self.evidence is None:
            raise self._abort("release called before a successful verify",
                              VerdictReason.MALFORMED_MESSAGE)
        cfg = self.config
        try:
            c3 = find_message(inbox, MessageKind.C3, Party.BOB, cfg.seq_num, Party.TRENT)
            check_cipher_length(c3, qcrypto.syndrome_message_length(cfg.syndrome_bits))
            self.s_B = qcrypto.decode_syndrome_message(
                qcrypto.otp_decrypt(self.k_tb, c3.bits, purpose="C3"))
        except (ProtocolAbort, KeyLengthError, KeyExhaustedError) as e:
            raise self._abort(f"C3 rejected: {e}", VerdictReason.MALFORMED_MESSAGE)
        self.state = PartyState.RELEASED
        return trent_release(cfg.seq_num, self.evidence.s_T, self.k_tb)


@dataclass(eq=False)
class BobHeld:
    """What Bob keeps between the challenge and the final check"""
    rho_prime: StateVector
    s_B: Syndrome
    k_B: CodeFamilyKey
    x_B: QotpKey
    X_B: DerivedX
    copy_1: Signature
    copy_2: Signature


class Bob:
    """Verifier: measures the syndrome, challenges Trent, then compares signatures"""

    def __init__(self, config: SessionConfig, k_tb: ClassicalKey, registry: PublicKeyRegistry,
                 rng: RandomStream, transcript: SessionTranscript):
        self.config = config
        self.k_tb = k_tb
        self.registry = registry
        self.rng = rng
        self.transcript = transcript
        self.state = PartyState.READY
        self.held: Optional[BobHeld] = None

    def _abort(self, message: str, reason: VerdictReason, e_count: int = 0) -> ProtocolAbort:
        self.state = PartyState.ABORTED
        self.transcript.log_decision(Party.BOB, "abort", reason=reason.value, e_count=e_count)
        logger.debug(f"Bob aborts seq {self.config.seq_num}: {message}")
        return ProtocolAbort(message, reason=reason, party=Party.BOB.value,
                             details={"e_count": e_count})

    def receive_and_challenge(self, inbox: Sequence[ProtocolMessage]) -> ProtocolMessage:
        if self.state != PartyState.READY:
            raise self._abort("challenge called out of order", VerdictReason.MALFORMED_MESSAGE)
        cfg = self.config
        try:
            payload = find_message(inbox, MessageKind.QUANTUM_PAYLOAD, Party.ALICE, cfg.seq_num, Party.BOB)
            copies_msg = find_message(inbox, MessageKind.SIGNATURE_COPIES, Party.ALICE,
                                      cfg.seq_num, Party.BOB)
            c2 = find_message(inbox, MessageKind.C2, Party.TRENT, cfg.seq_num, Party.BOB)
            copy_1, copy_2 = split_copies(copies_msg, cfg.num_blocks, Party.BOB)
            if len(payload.states) != 1:
                raise KeyLengthError("Quantum payload must hold exactly one state", field="pi")
            check_cipher_length(c2, qcrypto.c2_length(settings.CODE_FAMILY_KEY_BITS, 2 * cfg.n_msg))
            k_b, x_b = qcrypto.decode_c2(qcrypto.otp_decrypt(self.k_tb, c2.bits, purpose="C2"))
            if len(x_b) != 2 * cfg.n_msg:
                raise KeyLengthError("C2 carries a key of the wrong length", field="x",
                                     expected=2 * cfg.n_msg, actual=len(x_b))
        except (ProtocolAbort, KeyLengthError, KeyExhaustedError) as e:
            raise self._abort(f"Inbox rejected: {e}", VerdictReason.MALFORMED_MESSAGE)

        code = stabilizer.derive_code(k_b)
        pi = payload.states[0]
        try:
            s_b, post = stabilizer.measure_syndrome_blocks(code, pi, self.rng)
            if len(s_b) != cfg.syndrome_bits:
                raise QuantumStateError("Payload has the wrong number of code blocks",
                                        expected=cfg.syndrome_bits, actual=len(s_b))
            rho_prime = stabilizer.decode_blocks(code, post, s_b)
        except QuantumStateError as e:
            raise self._abort(f"Payload rejected: {e.message}", VerdictReason.MALFORMED_MESSAGE)
        except DecodeError as e:
            raise self._abort(f"Decode failed: {e.message}", VerdictReason.DECODE_FAILURE)

        x_derived = qcrypto.derive_X(x_b, s_b.bits[:cfg.s_used_bits])
        self.held = BobHeld(rho_prime=rho_prime, s_B=s_b, k_B=k_b, x_B=x_b, X_B=x_derived,
                            copy_1=copy_1, copy_2=copy_2)
        c3 = qcrypto.otp_encrypt(self.k_tb, qcrypto.encode_syndrome_message(s_b), purpose="C3")
        self.state = PartyState.CHALLENGED
        self.transcript.log_decision(Party.BOB, "challenge")
        return ProtocolMessage(cfg.seq_num, Party.BOB, Party.TRENT, MessageKind.C3, bits=c3)

    def finalize(self, inbox: Sequence[ProtocolMessage]) -> Verdict:
        if self.state != PartyState.CHALLENGED or self.held is None:
            raise self._abort("finalize called before the challenge", VerdictReason.MALFORMED_MESSAGE)
        cfg = self.config
        held = self.held
        try:
            c4 = find_message(inbox, MessageKind.C4, Party.TRENT, cfg.seq_num, Party.BOB)
            check_cipher_length(c4, qcrypto.syndrome_message_length(cfg.syndrome_bits))
            s_t = qcrypto.decode_syndrome_message(qcrypto.otp_decrypt(self.k_tb, c4.bits, purpose="C4"))
        except (ProtocolAbort, KeyLengthError, KeyExhaustedError) as e:
            raise self._abort(f"C4 rejected: {e}", VerdictReason.MALFORMED_MESSAGE)

        if s_t != held.s_B:
            raise self._abort("Measured syndrome differs from Trent's", VerdictReason.SYNDROME_MISMATCH)

        reference = self.registry.signature_for(held.X_B)
        failed = failed_blocks(held.copy_1, held.copy_2, reference, self.rng, cfg.swap_repetitions)
        e_count = len(failed)
        exact = exact_signature_match((held.copy_1, held.copy_2), reference)
        if e_count > cfg.max_failed_blocks:
            raise self._abort(f"{e_count} signature blocks failed", VerdictReason.SIGNATURE_MISMATCH,
                              e_count=e_count)

        recovered = qcrypto.qotp_decrypt(held.rho_prime, held.x_B)
        self.state = PartyState.FINALIZED
        self.transcript.log_decision(Party.BOB, "accept", e_count=e_count, exact_match=exact)
        return Verdict(accepted=True, e_count=e_count, reason=VerdictReason.ACCEPTED,
                       recovered_state=recovered, exact_match=exact, party=Party.BOB)
