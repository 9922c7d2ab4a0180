# qdsig/models/keys.py
from dataclasses import dataclass, field
from typing import Dict, Iterator, Tuple

from qdsig.core.exceptions import KeyExhaustedError, KeyLengthError
from qdsig.models.quantum import StateVector
from qdsig.utils.bits import as_bits

KeyIndex = Tuple[int, int]


@dataclass(frozen=True)
class SecretKey:
    """One secret string u_{i,j} of length w"""
    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits))

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True, eq=False)
class KeyPair:
    secret: SecretKey
    public: StateVector


@dataclass(frozen=True, eq=False)
class KeyPairSet:
    """Alice's 4·n_msg (secret, fingerprint) pairs indexed by (i, j), 1 <= i <= 2n, j in {0, 1}"""
    n_msg: int
    entries: Dict[KeyIndex, KeyPair]

    def __post_init__(self):
        expected = {(i, j) for i in range(1, 2 * self.n_msg + 1) for j in (0, 1)}
        if set(self.entries) != expected:
            raise KeyLengthError("Key pair set must hold exactly 4·n_msg indexed entries",
                                 field="entries", expected=4 * self.n_msg,
                                 actual=len(self.entries))

    @property
    def num_blocks(self) -> int:
        return 2 * self.n_msg

    def __len__(self) -> int:
        return len(self.entries)

    def indices(self) -> Iterator[KeyIndex]:
        return iter(sorted(self.entries))

    def public(self, i: int, j: int) -> StateVector:
        return self.entries[(i, j)].public

    def secret(self, i: int, j: int) -> SecretKey:
        return self.entries[(i, j)].secret

    def public_states(self) -> Dict[KeyIndex, StateVector]:
        return {idx: pair.public for idx, pair in sorted(self.entries.items())}

    def secret_keys(self) -> Dict[KeyIndex, SecretKey]:
        return {idx: pair.secret for idx, pair in sorted(self.entries.items())}


@dataclass
class ClassicalKey:
    """Shared one-time pad material; each party holds its own copy and consumes it in lockstep"""
    name: str
    bits: Tuple[int, ...]
    consumed: int = 0
    used_by: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.bits = as_bits(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def remaining(self) -> int:
        return len(self.bits) - self.consumed

    def take(self, count: int, purpose: str = "") -> Tuple[int, ...]:
        """Consume the next `count` bits; never hands out a bit twice"""
        if count > self.remaining:
            raise KeyExhaustedError(
                f"Key {self.name} has {self.remaining} unconsumed bits, {count} requested",
                key_name=self.name, requested=count, remaining=self.remaining
            )
        segment = self.bits[self.consumed:self.consumed + count]
        self.consumed += count
        if purpose:
            self.used_by[purpose] = self.used_by.get(purpose, 0) + count
        return segment

    def copy(self) -> "ClassicalKey":
        """Fresh holder of the same key material (the other party's copy)"""
        return ClassicalKey(self.name, self.bits)


@dataclass(frozen=True)
class QotpKey:
    """Quantum one-time pad key: bits (2q, 2q+1) select X and Z on qubit q"""
    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = as_bits(self.bits)
        if len(bits) % 2:
            raise KeyLengthError("Qotp key needs two bits per qubit", field="x", actual=len(bits))
        object.__setattr__(self, "bits", bits)

    @property
    def num_qubits(self) -> int:
        return len(self.bits) // 2

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class DerivedX:
    """X = (x_prefix XOR s) || x_suffix; selects y_{i, X_i} for the signature"""
    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bits(self.bits))

    def __len__(self) -> int:
        return len(self.bits)
