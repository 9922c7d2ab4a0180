# qdsig/models/quantum.py
"""
Quantum value types.

Qubit ordering: qubit 0 is the leftmost tensor factor and the most significant
bit of the basis index (big-endian). Every module relies on this convention.

PauliString uses letter form: P = i**phase_exp * (sigma_0 ⊗ ... ⊗ sigma_{n-1}),
where (x, z) = (0,0) I, (1,0) X, (1,1) Y, (0,1) Z. A PauliString is Hermitian
exactly when its phase is ±1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from qdsig.core.config import settings
from qdsig.core.exceptions import QuantumStateError
from qdsig.utils.bits import bits_to_hex, hex_to_bits

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_FROM_LETTER = {v: k for k, v in _LETTERS.items()}
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex amplitude array over num_qubits qubits"""
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 0:
            raise QuantumStateError("num_qubits must be nonnegative", actual=self.num_qubits)
        if self.num_qubits > settings.MAX_QUBITS:
            raise QuantumStateError(
                f"State of {self.num_qubits} qubits exceeds the {settings.MAX_QUBITS}-qubit limit",
                expected=settings.MAX_QUBITS, actual=self.num_qubits
            )
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 2 ** self.num_qubits:
            raise QuantumStateError(
                "Amplitude count must be 2**num_qubits",
                expected=2 ** self.num_qubits, actual=amps.shape[0]
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > settings.TOLERANCE:
            raise QuantumStateError("State is not normalized", details={"norm": norm})
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex], normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        size = amps.shape[0]
        num_qubits = size.bit_length() - 1
        if size == 0 or (1 << num_qubits) != size:
            raise QuantumStateError("Amplitude count must be a power of two", actual=size)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm < settings.TOLERANCE:
                raise QuantumStateError("Cannot normalize the zero vector")
            amps = amps / norm
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2 ** num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def from_label(cls, label: str) -> "StateVector":
        """Product state from characters 0, 1, + and -"""
        singles = {
            "0": np.array([1, 0], dtype=complex),
            "1": np.array([0, 1], dtype=complex),
            "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
            "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
        }
        amps = np.array([1.0], dtype=complex)
        for ch in label:
            if ch not in singles:
                raise QuantumStateError(f"Unknown state label character '{ch}'")
            amps = np.kron(amps, singles[ch])
        return cls(len(label), amps)

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    def equals(self, other: "StateVector", tol: Optional[float] = None) -> bool:
        """Amplitude-wise equality within tolerance (global phase matters)"""
        tol = settings.TOLERANCE if tol is None else tol
        return (self.num_qubits == other.num_qubits
                and bool(np.all(np.abs(self.amplitudes - other.amplitudes) <= tol)))

    def equals_up_to_phase(self, other: "StateVector", tol: Optional[float] = None) -> bool:
        tol = settings.TOLERANCE if tol is None else tol
        if self.num_qubits != other.num_qubits:
            return False
        return abs(abs(np.vdot(self.amplitudes, other.amplitudes)) - 1.0) <= tol

    def to_pairs(self) -> List[List[float]]:
        """Simulation-debug serialization: (re, im) pairs"""
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "StateVector":
        return cls.from_amplitudes([complex(re, im) for re, im in pairs])


Signature = Tuple[StateVector, ...]


@dataclass(frozen=True)
class PauliString:
    """Element of the n-qubit Pauli group in letter form"""
    x_bits: Tuple[int, ...]
    z_bits: Tuple[int, ...]
    phase_exp: int = 0

    def __post_init__(self):
        x = tuple(int(b) & 1 for b in self.x_bits)
        z = tuple(int(b) & 1 for b in self.z_bits)
        if len(x) != len(z):
            raise QuantumStateError("x_bits and z_bits differ in length",
                                    expected=len(x), actual=len(z))
        object.__setattr__(self, "x_bits", x)
        object.__setattr__(self, "z_bits", z)
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % 4)

    @property
    def num_qubits(self) -> int:
        return len(self.x_bits)

    @property
    def phase(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase_exp]

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    @property
    def weight(self) -> int:
        return sum(1 for x, z in zip(self.x_bits, self.z_bits) if x or z)

    @property
    def letters(self) -> str:
        return "".join(_LETTERS[(x, z)] for x, z in zip(self.x_bits, self.z_bits))

    @property
    def label(self) -> str:
        return _PHASE_PREFIX[self.phase_exp] + self.letters

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliString":
        return cls((0,) * num_qubits, (0,) * num_qubits)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels such as 'XZZXI', '-XZ', '+iY'"""
        text = label.strip()
        phase_exp = 0
        for prefix, exp in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if text.startswith(prefix):
                phase_exp = exp
                text = text[len(prefix):]
                break
        try:
            pairs = [_FROM_LETTER[ch] for ch in text.upper()]
        except KeyError as e:
            raise QuantumStateError(f"Unknown Pauli letter in '{label}'") from e
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), phase_exp)

    @classmethod
    def single(cls, num_qubits: int, qubit: int, letter: str) -> "PauliString":
        x = [0] * num_qubits
        z = [0] * num_qubits
        x[qubit], z[qubit] = _FROM_LETTER[letter]
        return cls(tuple(x), tuple(z))

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.num_qubits != other.num_qubits:
            raise QuantumStateError("Pauli product of mismatched sizes",
                                    expected=self.num_qubits, actual=other.num_qubits)
        exp = self.phase_exp + other.phase_exp
        x_out, z_out = [], []
        for a, b, c, d in zip(self.x_bits, self.z_bits, other.x_bits, other.z_bits):
            e, f = a ^ c, b ^ d
            # letter form -> X^x Z^z, reorder Z^b X^c, back to letter form
            exp += a * b + c * d + 2 * b * c - e * f
            x_out.append(e)
            z_out.append(f)
        return PauliString(tuple(x_out), tuple(z_out), exp)

    def symplectic(self, other: "PauliString") -> int:
        """0 if the two strings commute, 1 if they anticommute"""
        if self.num_qubits != other.num_qubits:
            raise QuantumStateError("Symplectic product of mismatched sizes",
                                    expected=self.num_qubits, actual=other.num_qubits)
        total = 0
        for a, b, c, d in zip(self.x_bits, self.z_bits, other.x_bits, other.z_bits):
            total += a * d + b * c
        return total % 2

    def commutes_with(self, other: "PauliString") -> bool:
        return self.symplectic(other) == 0

    def negate(self) -> "PauliString":
        return PauliString(self.x_bits, self.z_bits, self.phase_exp + 2)

    def strip_phase(self) -> "PauliString":
        return PauliString(self.x_bits, self.z_bits, 0)

    def embed(self, total_qubits: int, offset: int) -> "PauliString":
        """Place this string on qubits [offset, offset + n) of a larger register"""
        if offset < 0 or offset + self.num_qubits > total_qubits:
            raise QuantumStateError("Embedding falls outside the register",
                                    expected=total_qubits, actual=offset + self.num_qubits)
        pad_left = (0,) * offset
        pad_right = (0,) * (total_qubits - offset - self.num_qubits)
        return PauliString(pad_left + self.x_bits + pad_right,
                           pad_left + self.z_bits + pad_right, self.phase_exp)

    def to_matrix(self) -> np.ndarray:
        matrix = np.array([[self.phase]], dtype=complex)
        for letter in self.letters:
            matrix = np.kron(matrix, PAULI_MATRICES[letter])
        return matrix

    def to_dict(self) -> Dict[str, Any]:
        return {
            "phase": _PHASE_PREFIX[self.phase_exp],
            "num_qubits": self.num_qubits,
            "x": bits_to_hex(self.x_bits),
            "z": bits_to_hex(self.z_bits),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PauliString":
        n = int(data["num_qubits"])
        exp = {v: k for k, v in _PHASE_PREFIX.items()}[data["phase"]]
        return cls(hex_to_bits(data["x"], n), hex_to_bits(data["z"], n), exp)
