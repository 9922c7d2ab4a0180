# qdsig/models/messages.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from qdsig.models.codes import CodeFamilyKey, Syndrome
from qdsig.models.keys import QotpKey
from qdsig.models.quantum import Signature, StateVector
from qdsig.utils.bits import Bits, bits_to_hex, hex_to_bits


class Party(str, Enum):
    ALICE = "Alice"
    BOB = "Bob"
    TRENT = "Trent"


class MessageKind(str, Enum):
    QUANTUM_PAYLOAD = "QuantumPayload"
    SIGNATURE_COPIES = "SignatureCopies"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    DISPUTE_REQUEST = "DisputeRequest"
    DISPUTE_VERDICT = "DisputeVerdict"


QUANTUM_KINDS = (MessageKind.QUANTUM_PAYLOAD, MessageKind.SIGNATURE_COPIES)


class VerdictReason(str, Enum):
    ACCEPTED = "Accepted"
    SYNDROME_MISMATCH = "SyndromeMismatch"
    SIGNATURE_MISMATCH = "SignatureMismatch"
    MALFORMED_MESSAGE = "MalformedMessage"
    DECODE_FAILURE = "DecodeFailure"
    ARBITRATOR_ABORT = "ArbitratorAbort"


class DisputeOutcome(str, Enum):
    ALICE_CHEATING = "AliceCheating"
    FORGED_BY_BOB_OR_OTHER = "ForgedByBobOrOther"
    UNRESOLVABLE = "Unresolvable"


@dataclass(frozen=True, eq=False)
class ProtocolMessage:
    """One message on a channel; quantum kinds carry states, classical kinds carry bits"""
    seq_num: int
    sender: Party
    receiver: Party
    kind: MessageKind
    bits: Bits = ()
    states: Tuple[StateVector, ...] = ()

    @property
    def is_quantum(self) -> bool:
        return self.kind in QUANTUM_KINDS

    def with_states(self, states: Tuple[StateVector, ...]) -> "ProtocolMessage":
        return ProtocolMessage(self.seq_num, self.sender, self.receiver, self.kind, self.bits, states)

    def with_bits(self, bits: Bits) -> "ProtocolMessage":
        return ProtocolMessage(self.seq_num, self.sender, self.receiver, self.kind, tuple(bits), self.states)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "seq_num": self.seq_num,
            "sender": self.sender.value,
            "receiver": self.receiver.value,
            "kind": self.kind.value,
        }
        if not self.is_quantum:
            data["length"] = len(self.bits)
            data["bits"] = bits_to_hex(self.bits)
        if self.states:
            # simulation-debug representation; no physical device exposes amplitudes
            data["non_physical"] = True
            data["states"] = [
                {"num_qubits": s.num_qubits, "amplitudes": s.to_pairs()} for s in self.states
            ]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProtocolMessage":
        kind = MessageKind(data["kind"])
        bits: Bits = ()
        if "bits" in data:
            bits = hex_to_bits(data["bits"], int(data["length"]))
        states = tuple(StateVector.from_pairs(s["amplitudes"]) for s in data.get("states", []))
        return cls(
            seq_num=int(data["seq_num"]),
            sender=Party(data["sender"]),
            receiver=Party(data["receiver"]),
            kind=kind,
            bits=bits,
            states=states,
        )


@dataclass
class SessionTranscript:
    """Append-only record of one session: messages in delivery order plus party decisions"""
    seq_num: int
    messages: List[ProtocolMessage] = field(default_factory=list)
    decisions: List[Dict[str, Any]] = field(default_factory=list)

    def append(self, message: ProtocolMessage):
        self.messages.append(message)

    def log_decision(self, party: Party, event: str, **detail: Any):
        entry = {"party": party.value, "event": event}
        entry.update(detail)
        self.decisions.append(entry)

    def __len__(self) -> int:
        return len(self.messages)

    def kinds(self) -> List[MessageKind]:
        return [m.kind for m in self.messages]


@dataclass(eq=False)
class Verdict:
    accepted: bool
    e_count: int
    reason: VerdictReason
    recovered_state: Optional[StateVector] = None
    exact_match: bool = False
    party: Party = Party.BOB
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accepted": self.accepted,
            "e_count": self.e_count,
            "reason": self.reason.value,
            "exact_match": self.exact_match,
            "party": self.party.value,
            "detail": self.detail,
        }


@dataclass(frozen=True, eq=False)
class TrentEvidence:
    """What the arbitrator keeps after verification for later disputes"""
    seq_num: int
    retained_copy: Signature
    s_T: Syndrome
    k_T: CodeFamilyKey
    x_T: QotpKey


@dataclass
class DisputeVerdict:
    outcome: DisputeOutcome
    failed_blocks: int = 0
    syndrome_match: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "failed_blocks": self.failed_blocks,
            "syndrome_match": self.syndrome_match,
        }
