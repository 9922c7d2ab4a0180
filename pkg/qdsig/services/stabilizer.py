# qdsig/services/stabilizer.py
"""
Stabilizer-code algebra for the authenticated encoding.

The base code is the [[5,1,3]] perfect code. The keyed family Q_k is obtained
by a k-seeded qubit permutation followed by a per-qubit single-qubit Clifford;
both preserve commutation and weight, so every member is again a distance-3
nondegenerate code. Messages of n_msg qubits are encoded blockwise: block b
occupies qubits 5b..5b+4 and its syndrome occupies bits 4b..4b+3 of s.
"""
import itertools
import logging
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from qdsig.core.config import settings
from qdsig.core.exceptions import DecodeError, KeyLengthError, QuantumStateError, StabilizerCodeError
from qdsig.models.codes import CodeFamilyKey, StabilizerCode, Syndrome
from qdsig.models.quantum import PAULI_MATRICES, PauliString, StateVector
from qdsig.services.quantum_core import apply_pauli, apply_pauli_amplitudes, measure_pauli
from qdsig.utils.bits import bits_to_hex, bits_to_str
from qdsig.utils.random_stream import RandomStream, derive_seed

logger = logging.getLogger(__name__)

BASE_GENERATORS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")
BASE_LOGICAL_X = "XXXXX"
BASE_LOGICAL_Z = "ZZZZZ"


def syndrome_of_error(code: StabilizerCode, e: PauliString) -> Syndrome:
    """Bit i is 1 iff e anticommutes with generator i"""
    if e.num_qubits != code.n_phys:
        raise QuantumStateError("Error acts on the wrong number of qubits",
                                expected=code.n_phys, actual=e.num_qubits)
    return Syndrome(tuple(g.symplectic(e) for g in code.generators))


def _syndrome_value(generators: Sequence[PauliString], e: PauliString) -> int:
    value = 0
    for g in generators:
        value = (value << 1) | g.symplectic(e)
    return value


def _build_coset_table(generators: Sequence[PauliString], n_phys: int) -> Dict[int, PauliString]:
    """Minimal-weight representative for every syndrome, filled by increasing weight"""
    size = 2 ** len(generators)
    table: Dict[int, PauliString] = {0: PauliString.identity(n_phys)}
    for weight in range(1, n_phys + 1):
        if len(table) == size:
            break
        for support in itertools.combinations(range(n_phys), weight):
            for letters in itertools.product("XYZ", repeat=weight):
                chars = ["I"] * n_phys
                for q, letter in zip(support, letters):
                    chars[q] = letter
                e = PauliString.from_label("".join(chars))
                table.setdefault(_syndrome_value(generators, e), e)
    if len(table) != size:
        raise StabilizerCodeError("Coset table does not cover every syndrome",
                                  details={"covered": len(table), "expected": size})
    return table


def _gf2_rank(rows: List[List[int]]) -> int:
    matrix = [list(r) for r in rows]
    rank = 0
    cols = len(matrix[0]) if matrix else 0
    for col in range(cols):
        pivot = next((r for r in range(rank, len(matrix)) if matrix[r][col]), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        for r in range(len(matrix)):
            if r != rank and matrix[r][col]:
                matrix[r] = [a ^ b for a, b in zip(matrix[r], matrix[rank])]
        rank += 1
    return rank


def validate_code(code: StabilizerCode) -> None:
    """Raise StabilizerCodeError unless every StabilizerCode invariant holds"""
    gens = code.generators
    if len(gens) != code.n_phys - code.k_log:
        raise StabilizerCodeError("Generator count must equal n_phys - k_log",
                                  details={"generators": len(gens)})
    for a, b in itertools.combinations(range(len(gens)), 2):
        if not gens[a].commutes_with(gens[b]):
            raise StabilizerCodeError("Generators do not commute",
                                      details={"pair": [a, b]})
    if _gf2_rank([list(g.x_bits) + list(g.z_bits) for g in gens]) != len(gens):
        raise StabilizerCodeError("Generators are not independent")
    for lx, lz in zip(code.logical_x, code.logical_z):
        for i, g in enumerate(gens):
            if not (g.commutes_with(lx) and g.commutes_with(lz)):
                raise StabilizerCodeError("Logical operator does not commute with a generator",
                                          details={"generator": i})
        if lx.commutes_with(lz):
            raise StabilizerCodeError("Logical X and Z must anticommute")
    if code.coset_reps.get(0) is None or code.coset_reps[0].weight != 0:
        raise StabilizerCodeError("coset_reps[0] must be the identity")
    if len(code.coset_reps) != 2 ** code.syndrome_length:
        raise StabilizerCodeError("Coset table is incomplete",
                                  details={"entries": len(code.coset_reps)})
    for value, rep in code.coset_reps.items():
        if _syndrome_value(gens, rep) != value:
            raise StabilizerCodeError("Coset representative has the wrong syndrome",
                                      details={"syndrome": value, "rep": rep.label})


@lru_cache(maxsize=1)
def base_code() -> StabilizerCode:
    generators = tuple(PauliString.from_label(g) for g in BASE_GENERATORS)
    code = StabilizerCode(
        name="[[5,1,3]]",
        n_phys=5,
        k_log=1,
        distance=3,
        generators=generators,
        logical_x=(PauliString.from_label(BASE_LOGICAL_X),),
        logical_z=(PauliString.from_label(BASE_LOGICAL_Z),),
        coset_reps=_build_coset_table(generators, 5),
    )
    validate_code(code)
    return code


def _phase_normalized(matrix: np.ndarray) -> Tuple:
    flat = matrix.reshape(-1)
    lead = flat[np.argmax(np.abs(flat) > 1e-9)]
    normalized = flat * (abs(lead) / lead)
    return tuple(np.round(normalized, 8).tolist())


@lru_cache(maxsize=1)
def local_cliffords() -> Tuple[Dict[str, Tuple[int, str]], ...]:
    """The 24 single-qubit Cliffords as letter maps sigma -> (sign, sigma')"""
    hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    phase = np.array([[1, 0], [0, 1j]], dtype=complex)
    seen = {_phase_normalized(np.eye(2)): np.eye(2, dtype=complex)}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for element in frontier:
            for gate in (hadamard, phase):
                product = gate @ element
                key = _phase_normalized(product)
                if key not in seen:
                    seen[key] = product
                    nxt.append(product)
        frontier = nxt

    tables = []
    for clifford in seen.values():
        mapping = {"I": (1, "I")}
        for letter in "XYZ":
            image = clifford @ PAULI_MATRICES[letter] @ clifford.conj().T
            for target in "XYZ":
                for sign in (1, -1):
                    if np.allclose(image, sign * PAULI_MATRICES[target]):
                        mapping[letter] = (sign, target)
        tables.append(mapping)
    if len(tables) != 24:
        raise StabilizerCodeError("Single-qubit Clifford enumeration is incomplete",
                                  details={"found": len(tables)})
    return tuple(tables)


def _transform(p: PauliString, perm: Sequence[int], frames: Sequence[Dict[str, Tuple[int, str]]]) -> PauliString:
    """Conjugate qubit q by frames[q], then move it to position perm[q]"""
    letters = p.letters
    out = ["I"] * p.num_qubits
    flips = 0
    for q, letter in enumerate(letters):
        sign, image = frames[q][letter]
        if sign < 0:
            flips += 1
        out[perm[q]] = image
    result = PauliString.from_label("".join(out))
    return PauliString(result.x_bits, result.z_bits, p.phase_exp + 2 * flips)


@lru_cache(maxsize=512)
def _derive_code_cached(key_bits: Tuple[int, ...]) -> StabilizerCode:
    base = base_code()
    if not any(key_bits):
        return base
    rng = RandomStream(derive_seed(0, f"code-family:{bits_to_str(key_bits)}"))
    perm = rng.permutation(base.n_phys)
    cliffords = local_cliffords()
    frames = [cliffords[rng.integers(0, len(cliffords))] for _ in range(base.n_phys)]

    generators = tuple(_transform(g, perm, frames) for g in base.generators)
    code = StabilizerCode(
        name=f"{base.name}/k={bits_to_hex(key_bits)}",
        n_phys=base.n_phys,
        k_log=base.k_log,
        distance=base.distance,
        generators=generators,
        logical_x=tuple(_transform(p, perm, frames) for p in base.logical_x),
        logical_z=tuple(_transform(p, perm, frames) for p in base.logical_z),
        coset_reps=_build_coset_table(generators, base.n_phys),
    )
    validate_code(code)
    logger.debug(f"Derived code {code.name}: {[g.label for g in generators]}")
    return code


def derive_code(k: CodeFamilyKey) -> StabilizerCode:
    return _derive_code_cached(tuple(k.bits))


def encoding_isometry(code: StabilizerCode) -> np.ndarray:
    """Columns |0_L>, |1_L> of the encoder V (2^n_phys x 2)"""
    cached = code._cache.get("isometry")
    if cached is not None:
        return cached
    if code.k_log != 1:
        raise StabilizerCodeError("Only single-logical-qubit codes are supported",
                                  details={"k_log": code.k_log})
    dim = 2 ** code.n_phys
    projector = np.eye(dim, dtype=complex)
    for g in code.generators:
        projector = projector @ (np.eye(dim) + g.to_matrix()) / 2
    projector = projector @ (np.eye(dim) + code.logical_z[0].to_matrix()) / 2
    norms = np.linalg.norm(projector, axis=0)
    column = int(np.argmax(norms > 1e-6))
    zero_l = projector[:, column] / norms[column]
    one_l = apply_pauli_amplitudes(code.logical_x[0], zero_l, code.n_phys)
    isometry = np.stack([zero_l, one_l], axis=1)
    isometry.setflags(write=False)
    code._cache["isometry"] = isometry
    return isometry


def _apply_per_block(matrix: np.ndarray, amplitudes: np.ndarray, blocks: int) -> np.ndarray:
    """Apply `matrix` to every block axis of a blocks-fold tensor"""
    tensor = amplitudes.reshape((matrix.shape[1],) * blocks)
    for b in range(blocks):
        tensor = np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [b])), 0, b)
    return tensor.reshape(-1)


def _check_block_state(code: StabilizerCode, state: StateVector) -> int:
    if state.num_qubits % code.n_phys:
        raise QuantumStateError("State does not split into whole code blocks",
                                expected=code.n_phys, actual=state.num_qubits)
    return state.num_qubits // code.n_phys


def encode(code: StabilizerCode, logical: StateVector) -> StateVector:
    if logical.num_qubits != code.k_log:
        raise QuantumStateError("Logical state size does not match the code",
                                expected=code.k_log, actual=logical.num_qubits)
    return StateVector(code.n_phys, encoding_isometry(code) @ logical.amplitudes)


def encode_blocks(code: StabilizerCode, message: StateVector) -> StateVector:
    """One code block per message qubit"""
    total = message.num_qubits * code.n_phys
    if total > settings.MAX_QUBITS:
        raise QuantumStateError(
            f"Encoding {message.num_qubits} qubits needs {total} qubits, over the limit",
            expected=settings.MAX_QUBITS, actual=total
        )
    amps = _apply_per_block(encoding_isometry(code), message.amplitudes, message.num_qubits)
    return StateVector(total, amps)


def _block_operator(code: StabilizerCode, s: Syndrome, blocks: int) -> PauliString:
    """Product of the per-block coset representatives selected by s"""
    if len(s) != blocks * code.syndrome_length:
        raise KeyLengthError("Syndrome length does not match the block count",
                             field="s", expected=blocks * code.syndrome_length, actual=len(s))
    total = blocks * code.n_phys
    operator = PauliString.identity(total)
    for b, part in enumerate(s.blocks(code.syndrome_length)):
        operator = operator * code.coset_rep(part).embed(total, b * code.n_phys)
    return operator


def apply_syndrome_offset(code: StabilizerCode, state: StateVector, s: Syndrome) -> StateVector:
    if state.num_qubits != code.n_phys:
        raise QuantumStateError("State size does not match the code",
                                expected=code.n_phys, actual=state.num_qubits)
    return apply_pauli(code.coset_rep(s), state)


def apply_offsets(code: StabilizerCode, state: StateVector, s: Syndrome) -> StateVector:
    blocks = _check_block_state(code, state)
    return apply_pauli(_block_operator(code, s, blocks), state)


def measure_syndrome(code: StabilizerCode, state: StateVector,
                     rng: RandomStream) -> Tuple[Syndrome, StateVector]:
    if state.num_qubits != code.n_phys:
        raise QuantumStateError("State size does not match the code",
                                expected=code.n_phys, actual=state.num_qubits)
    bits = []
    for g in code.generators:
        eigenvalue, state = measure_pauli(g, state, rng)
        bits.append(0 if eigenvalue == 1 else 1)
    return Syndrome(tuple(bits)), state


def measure_syndrome_blocks(code: StabilizerCode, state: StateVector,
                            rng: RandomStream) -> Tuple[Syndrome, StateVector]:
    blocks = _check_block_state(code, state)
    bits = []
    for b in range(blocks):
        for g in code.generators:
            eigenvalue, state = measure_pauli(g.embed(state.num_qubits, b * code.n_phys), state, rng)
            bits.append(0 if eigenvalue == 1 else 1)
    return Syndrome(tuple(bits)), state


def _expectation_amps(g: PauliString, amps: np.ndarray, num_qubits: int) -> float:
    return float(np.vdot(amps, apply_pauli_amplitudes(g, amps, num_qubits)).real)


def decode_blocks(code: StabilizerCode, state: StateVector, s: Syndrome) -> StateVector:
    """Remove the offsets, check the codespace and invert the encoder on every block"""
    blocks = _check_block_state(code, state)
    cleared = apply_pauli(_block_operator(code, s, blocks), state)
    for b in range(blocks):
        for i, g in enumerate(code.generators):
            value = _expectation_amps(g.embed(state.num_qubits, b * code.n_phys),
                                      cleared.amplitudes, state.num_qubits)
            if value < 1.0 - 1e-8:
                raise DecodeError(
                    f"Residual stabilizer eigenvalue on block {b}, generator {i} ({value:+.4f})",
                    block=b, generator=i
                )
    logical = _apply_per_block(encoding_isometry(code).conj().T, cleared.amplitudes, blocks)
    norm = float(np.linalg.norm(logical))
    if abs(norm - 1.0) > 1e-8:
        raise DecodeError(f"Decoded norm {norm:.6f} differs from 1")
    return StateVector(blocks, logical / norm)


def decode(code: StabilizerCode, state: StateVector, s: Syndrome) -> StateVector:
    if state.num_qubits != code.n_phys:
        raise QuantumStateError("State size does not match the code",
                                expected=code.n_phys, actual=state.num_qubits)
    return decode_blocks(code, state, s)


def correct(code: StabilizerCode, state: StateVector, measured: Syndrome,
            expected: Syndrome) -> StateVector:
    """Undo a correctable error sitting on top of the expected offset"""
    blocks = _check_block_state(code, state)
    return apply_pauli(_block_operator(code, measured.xor(expected), blocks), state)
