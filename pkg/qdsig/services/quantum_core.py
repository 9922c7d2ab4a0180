# qdsig/services/quantum_core.py
"""
Dense statevector operations.

Swap tests are sampled in closed form from (1 + |<a|b>|^2) / 2; the explicit
controlled-swap circuit is kept as an oracle (swap_test_circuit_probability)
and must agree with the closed form.
"""
import logging
from typing import Sequence, Tuple

import numpy as np

from qdsig.core.config import settings
from qdsig.core.exceptions import QuantumStateError
from qdsig.models.quantum import PauliString, StateVector
from qdsig.utils.bits import bits_to_int
from qdsig.utils.random_stream import RandomStream

logger = logging.getLogger(__name__)

_SQRT2_INV = 1 / np.sqrt(2)
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV


def _check_same_size(a: int, b: int, what: str):
    if a != b:
        raise QuantumStateError(f"Dimension mismatch in {what}", expected=a, actual=b)


def _parity(values: np.ndarray) -> np.ndarray:
    parity = np.zeros_like(values)
    remaining = values.copy()
    while np.any(remaining):
        parity ^= remaining & 1
        remaining >>= 1
    return parity


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product; a occupies the leading qubits"""
    return StateVector(a.num_qubits + b.num_qubits, np.kron(a.amplitudes, b.amplitudes))


def tensor_all(states: Sequence[StateVector]) -> StateVector:
    if not states:
        return StateVector(0, np.array([1.0], dtype=complex))
    total = sum(s.num_qubits for s in states)
    if total > settings.MAX_QUBITS:
        raise QuantumStateError(
            f"Joint state of {total} qubits exceeds the {settings.MAX_QUBITS}-qubit limit",
            expected=settings.MAX_QUBITS, actual=total
        )
    amps = states[0].amplitudes
    for s in states[1:]:
        amps = np.kron(amps, s.amplitudes)
    return StateVector(total, amps)


def apply_pauli_amplitudes(p: PauliString, amplitudes: np.ndarray, num_qubits: int) -> np.ndarray:
    """Apply p to a raw amplitude array (no normalization check)"""
    _check_same_size(num_qubits, p.num_qubits, "apply_pauli")
    indices = np.arange(2 ** num_qubits, dtype=np.int64)
    x_mask = bits_to_int(p.x_bits)
    z_mask = bits_to_int(p.z_bits)
    n_y = sum(x & z for x, z in zip(p.x_bits, p.z_bits))
    coeff = p.phase * (1j ** n_y)
    signs = 1 - 2 * _parity(indices & z_mask)
    out = np.empty(2 ** num_qubits, dtype=np.complex128)
    out[indices ^ x_mask] = coeff * signs * amplitudes
    return out


def apply_pauli(p: PauliString, s: StateVector) -> StateVector:
    return StateVector(s.num_qubits, apply_pauli_amplitudes(p, s.amplitudes, s.num_qubits))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in a"""
    _check_same_size(a.num_qubits, b.num_qubits, "inner_product")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, insensitive to global phase"""
    return float(abs(inner_product(a, b)) ** 2)


def swap_test_pass_probability(a: StateVector, b: StateVector) -> float:
    overlap_sq = min(abs(inner_product(a, b)) ** 2, 1.0)
    return (1.0 + overlap_sq) / 2.0


def swap_test(a: StateVector, b: StateVector, rng: RandomStream, repetitions: int = 1) -> bool:
    """True when every repetition of the swap test passes"""
    p = swap_test_pass_probability(a, b)
    if p >= 1.0 - settings.TOLERANCE:
        # one-sided: identical states always pass; keep the stream advancing uniformly
        for _ in range(repetitions):
            rng.random()
        return True
    passed = True
    for _ in range(repetitions):
        if not rng.bernoulli(p):
            passed = False
    return passed


def swap_test_circuit_probability(a: StateVector, b: StateVector) -> float:
    """Ancilla |0> probability of H - controlled-SWAP - H, simulated explicitly"""
    _check_same_size(a.num_qubits, b.num_qubits, "swap_test")
    dim = a.dimension
    joint = np.zeros((2, dim, dim), dtype=complex)
    joint[0] = np.outer(a.amplitudes, b.amplitudes)
    joint = np.tensordot(_HADAMARD, joint, axes=([1], [0]))
    # controlled swap: exchange the two registers on the ancilla-1 branch
    joint[1] = joint[1].T.copy()
    joint = np.tensordot(_HADAMARD, joint, axes=([1], [0]))
    return float(np.sum(np.abs(joint[0]) ** 2))


def swap_test_density_probability(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """Same circuit on density matrices: P0 = Tr[(|0><0| ⊗ I) U rho U†]"""
    dim = rho_a.shape[0]
    _check_same_size(dim, rho_b.shape[0], "swap_test_density")
    ancilla = np.array([[1, 0], [0, 0]], dtype=complex)
    rho = np.kron(ancilla, np.kron(rho_a, rho_b))
    swap = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            swap[j * dim + i, i * dim + j] = 1.0
    identity = np.eye(dim * dim, dtype=complex)
    cswap = np.block([[identity, np.zeros_like(identity)], [np.zeros_like(identity), swap]])
    h_full = np.kron(_HADAMARD, identity)
    unitary = h_full @ cswap @ h_full
    evolved = unitary @ rho @ unitary.conj().T
    project0 = np.kron(ancilla, identity)
    return float(np.trace(project0 @ evolved).real)


def measure_pauli(g: PauliString, s: StateVector, rng: RandomStream) -> Tuple[int, StateVector]:
    """Projective measurement of a Hermitian Pauli; returns (eigenvalue, post-state)"""
    if not g.is_hermitian:
        raise QuantumStateError(f"Cannot measure non-Hermitian Pauli {g.label}")
    _check_same_size(s.num_qubits, g.num_qubits, "measure_pauli")
    g_amps = apply_pauli_amplitudes(g, s.amplitudes, s.num_qubits)
    p_plus = (1.0 + float(np.vdot(s.amplitudes, g_amps).real)) / 2.0
    if p_plus > 1.0 - settings.TOLERANCE:
        p_plus = 1.0
    elif p_plus < settings.TOLERANCE:
        p_plus = 0.0
    eigenvalue = 1 if rng.random() < p_plus else -1
    prob = p_plus if eigenvalue == 1 else 1.0 - p_plus
    projected = (s.amplitudes + eigenvalue * g_amps) / 2.0
    return eigenvalue, StateVector(s.num_qubits, projected / np.sqrt(prob))


def expectation(g: PauliString, s: StateVector) -> float:
    g_amps = apply_pauli_amplitudes(g, s.amplitudes, s.num_qubits)
    return float(np.vdot(s.amplitudes, g_amps).real)


def random_state(num_qubits: int, rng: RandomStream) -> StateVector:
    """Haar-random pure state"""
    amps = rng.complex_normal(2 ** num_qubits)
    return StateVector(num_qubits, amps / np.linalg.norm(amps))


def state_with_overlap(a: StateVector, overlap: float, rng: RandomStream) -> StateVector:
    """A state b with |<a|b>| = overlap"""
    if not 0.0 <= overlap <= 1.0:
        raise QuantumStateError("Overlap must lie in [0, 1]", details={"overlap": overlap})
    if a.dimension < 2:
        raise QuantumStateError("Need at least one qubit to build an orthogonal component")
    perp = rng.complex_normal(a.dimension)
    perp = perp - np.vdot(a.amplitudes, perp) * a.amplitudes
    perp = perp / np.linalg.norm(perp)
    amps = overlap * a.amplitudes + np.sqrt(1.0 - overlap ** 2) * perp
    return StateVector(a.num_qubits, amps / np.linalg.norm(amps))


def density_matrix(s: StateVector) -> np.ndarray:
    return np.outer(s.amplitudes, s.amplitudes.conj())


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    eigenvalues = np.linalg.eigvalsh(rho - sigma)
    return float(0.5 * np.sum(np.abs(eigenvalues)))
