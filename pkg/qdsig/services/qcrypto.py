# qdsig/services/qcrypto.py
import logging
from typing import Sequence, Tuple

from qdsig.core.exceptions import KeyLengthError
from qdsig.models.codes import CodeFamilyKey, Syndrome
from qdsig.models.keys import ClassicalKey, DerivedX, QotpKey
from qdsig.models.quantum import PauliString, StateVector
from qdsig.services.quantum_core import apply_pauli
from qdsig.utils.bits import Bits, bits_to_int, int_to_bits, pack_fields, packed_length, unpack_fields, xor_bits

logger = logging.getLogger(__name__)

SEQ_NUM_BITS = 32


def _pad_parts(state: StateVector, x: QotpKey) -> Tuple[PauliString, PauliString]:
    if x.num_qubits != state.num_qubits:
        raise KeyLengthError("Qotp key length must be twice the qubit count", field="x",
                             expected=2 * state.num_qubits, actual=len(x))
    x_part = PauliString(x.bits[0::2], (0,) * x.num_qubits)
    z_part = PauliString((0,) * x.num_qubits, x.bits[1::2])
    return x_part, z_part


def qotp_encrypt(state: StateVector, x: QotpKey) -> StateVector:
    """Per qubit q: X^{x[2q]} first, then Z^{x[2q+1]}"""
    x_part, z_part = _pad_parts(state, x)
    return apply_pauli(z_part * x_part, state)


def qotp_decrypt(state: StateVector, x: QotpKey) -> StateVector:
    x_part, z_part = _pad_parts(state, x)
    return apply_pauli(x_part * z_part, state)


def otp_encrypt(key: ClassicalKey, msg: Sequence[int], purpose: str = "") -> Bits:
    """XOR with the next |msg| unconsumed key bits"""
    segment = key.take(len(msg), purpose)
    return xor_bits(msg, segment)


def otp_decrypt(key: ClassicalKey, cipher: Sequence[int], purpose: str = "") -> Bits:
    segment = key.take(len(cipher), purpose)
    return xor_bits(cipher, segment)


def derive_X(x: QotpKey, s: Sequence[int]) -> DerivedX:
    """X = (first |s| bits of x XOR s) || remaining bits of x"""
    s = tuple(s)
    if len(s) > len(x):
        raise KeyLengthError("Syndrome mask is longer than the qotp key",
                             field="s", expected=len(x), actual=len(s))
    return DerivedX(xor_bits(x.bits[:len(s)], s) + x.bits[len(s):])


def recover_x(derived: DerivedX, s: Sequence[int]) -> QotpKey:
    s = tuple(s)
    if len(s) > len(derived):
        raise KeyLengthError("Syndrome mask is longer than X",
                             field="s", expected=len(derived), actual=len(s))
    return QotpKey(xor_bits(derived.bits[:len(s)], s) + derived.bits[len(s):])


# Plaintext layouts: each field is preceded by a 16-bit big-endian length.
# C1 = seq_num | s | k_fam | x     C2 = k_fam | x     C3 = s_B     C4 = s_T

def encode_c1(seq_num: int, s: Syndrome, k_fam: CodeFamilyKey, x: QotpKey) -> Bits:
    return pack_fields([int_to_bits(seq_num, SEQ_NUM_BITS), s.bits, k_fam.bits, x.bits])


def decode_c1(bits: Sequence[int]) -> Tuple[int, Syndrome, CodeFamilyKey, QotpKey]:
    seq, s, k_fam, x = unpack_fields(bits, 4)
    if len(seq) != SEQ_NUM_BITS:
        raise KeyLengthError("Sequence number field has the wrong width",
                             field="seq_num", expected=SEQ_NUM_BITS, actual=len(seq))
    return bits_to_int(seq), Syndrome(s), CodeFamilyKey(k_fam), QotpKey(x)


def encode_c2(k_fam: CodeFamilyKey, x: QotpKey) -> Bits:
    return pack_fields([k_fam.bits, x.bits])


def decode_c2(bits: Sequence[int]) -> Tuple[CodeFamilyKey, QotpKey]:
    k_fam, x = unpack_fields(bits, 2)
    return CodeFamilyKey(k_fam), QotpKey(x)


def encode_syndrome_message(s: Syndrome) -> Bits:
    """Layout shared by C3 (s_B) and C4 (s_T)"""
    return pack_fields([s.bits])


def decode_syndrome_message(bits: Sequence[int]) -> Syndrome:
    (s,) = unpack_fields(bits, 1)
    return Syndrome(s)


def c1_length(s_bits: int, k_bits: int, x_bits: int) -> int:
    return packed_length([SEQ_NUM_BITS, s_bits, k_bits, x_bits])


def c2_length(k_bits: int, x_bits: int) -> int:
    return packed_length([k_bits, x_bits])


def syndrome_message_length(s_bits: int) -> int:
    return packed_length([s_bits])
