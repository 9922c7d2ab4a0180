# qdsig/services/fingerprint.py
"""
Quantum fingerprints of classical strings.

A CodeSpec E maps F2^w to F2^m with pairwise agreement at most delta*m. The
register form f(u) = m^{-1/2} sum_l |l>|E_l(u)> has <f(u1)|f(u2)> equal to the
agreement fraction, so the overlap bound holds exactly. The phase form
m^{-1/2} sum_l (-1)^{E_l(u)} |l> is kept behind FINGERPRINT_FORM; its signed
overlap is (2a - m)/m.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from qdsig.core.config import settings
from qdsig.core.exceptions import CodeConstructionError, KeyLengthError
from qdsig.models.codes import CodeSpec
from qdsig.models.keys import KeyPair, KeyPairSet, SecretKey
from qdsig.models.quantum import StateVector
from qdsig.utils.bits import bits_to_int
from qdsig.utils.random_stream import RandomStream

logger = logging.getLogger(__name__)

FINGERPRINT_FORMS = ("register", "phase")


def _input_matrix(w: int) -> np.ndarray:
    """All 2^w inputs as rows of bits, big-endian"""
    indices = np.arange(2 ** w, dtype=np.int64)
    shifts = np.arange(w - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts[None, :]) & 1).astype(np.int64)


def agreement(a: Sequence[int], b: Sequence[int]) -> int:
    """Number of positions where two equal-length bit strings agree"""
    if len(a) != len(b):
        raise KeyLengthError("Codewords differ in length", field="codeword",
                             expected=len(a), actual=len(b))
    return sum(1 for x, y in zip(a, b) if int(x) == int(y))


def max_pairwise_agreement(codewords: np.ndarray) -> int:
    """Largest agreement count over distinct rows, via the ±1 Gram matrix"""
    rows = codewords.shape[0]
    if rows < 2:
        return 0
    m = codewords.shape[1]
    signs = 1 - 2 * codewords.astype(np.int64)
    gram = signs @ signs.T
    np.fill_diagonal(gram, -m - 1)
    # agreements = (m + <s1, s2>) / 2
    return int((m + gram.max()) // 2)


def build_code(w: int, c_rate: int, target_delta: float, rng: RandomStream) -> CodeSpec:
    """Random linear code with exhaustively verified agreement bound"""
    if w < 1 or w > 16:
        raise CodeConstructionError("w must lie in [1, 16]", w=w, c_rate=c_rate,
                                    target_delta=target_delta)
    if c_rate < 2:
        raise CodeConstructionError("c_rate must be at least 2", w=w, c_rate=c_rate,
                                    target_delta=target_delta)
    if not 0.0 < target_delta < 1.0:
        raise CodeConstructionError("target_delta must lie in (0, 1)", w=w, c_rate=c_rate,
                                    target_delta=target_delta)

    m = c_rate * w
    inputs = _input_matrix(w)
    best_delta = 1.0
    for attempt in range(1, settings.CODE_SEARCH_ATTEMPTS + 1):
        generator = np.array(rng.bits(w * m), dtype=np.int64).reshape(w, m)
        table = (inputs @ generator) % 2
        # linear code: agreement(E(u1), E(u2)) = m - weight(E(u1 ^ u2))
        min_weight = int(table[1:].sum(axis=1).min())
        if min_weight == 0:
            continue
        delta = (m - min_weight) / m
        best_delta = min(best_delta, delta)
        if delta <= target_delta:
            logger.info(f"Built [{m},{w}] code with delta={delta:.4f} after {attempt} attempts")
            return CodeSpec(w=w, c_rate=c_rate, codewords=table.astype(np.uint8),
                            delta=delta, generator=generator.astype(np.uint8))

    raise CodeConstructionError(
        f"No code with delta <= {target_delta} found in {settings.CODE_SEARCH_ATTEMPTS} "
        f"attempts for w={w}, c_rate={c_rate} (best {best_delta:.4f})",
        w=w, c_rate=c_rate, target_delta=target_delta
    )


def code_from_table(w: int, c_rate: int, codewords: Sequence[Sequence[int]]) -> CodeSpec:
    """Wrap an explicit codeword table, verifying injectivity and delta pairwise"""
    if w > settings.MAX_TABLE_W:
        raise CodeConstructionError(f"Explicit tables are limited to w <= {settings.MAX_TABLE_W}",
                                    w=w, c_rate=c_rate)
    table = np.array(codewords, dtype=np.uint8)
    m = c_rate * w
    if table.shape != (2 ** w, m):
        raise CodeConstructionError(
            f"Codeword table has shape {table.shape}, expected {(2 ** w, m)}",
            w=w, c_rate=c_rate
        )
    top = max_pairwise_agreement(table)
    if top >= m:
        raise CodeConstructionError("Codeword table is not injective", w=w, c_rate=c_rate)
    return CodeSpec(w=w, c_rate=c_rate, codewords=table, delta=top / m)


def encode_classical(code: CodeSpec, u: SecretKey) -> tuple:
    if len(u) != code.w:
        raise KeyLengthError("Secret key length does not match the code",
                             field="u", expected=code.w, actual=len(u))
    return code.codeword(bits_to_int(u.bits))


def index_qubits(code: CodeSpec) -> int:
    return max(1, (code.m - 1).bit_length())


def fingerprint_qubits(code: CodeSpec, form: Optional[str] = None) -> int:
    form = form or settings.FINGERPRINT_FORM
    return index_qubits(code) + (1 if form == "register" else 0)


def fingerprint(code: CodeSpec, u: SecretKey, form: Optional[str] = None) -> StateVector:
    form = form or settings.FINGERPRINT_FORM
    if form not in FINGERPRINT_FORMS:
        raise CodeConstructionError(f"Unknown fingerprint form '{form}'", w=code.w)
    word = np.array(encode_classical(code, u), dtype=np.int64)
    positions = np.arange(code.m, dtype=np.int64)
    num_qubits = fingerprint_qubits(code, form)
    amps = np.zeros(2 ** num_qubits, dtype=np.complex128)
    scale = 1.0 / np.sqrt(code.m)
    if form == "register":
        amps[(positions << 1) | word] = scale
    else:
        amps[positions] = scale * (1 - 2 * word)
    return StateVector(num_qubits, amps)


def generate_keypairs(n_msg: int, code: CodeSpec, rng: RandomStream,
                      form: Optional[str] = None) -> KeyPairSet:
    """4·n_msg uniform secrets u_{i,j} with their fingerprints; u_{i,0} != u_{i,1}"""
    if n_msg < 1:
        raise KeyLengthError("n_msg must be at least 1", field="n_msg", actual=n_msg)
    entries = {}
    for i in range(1, 2 * n_msg + 1):
        first = SecretKey(rng.bits(code.w))
        second = SecretKey(rng.bits(code.w))
        # the two secrets of a block must differ
        while second == first:
            second = SecretKey(rng.bits(code.w))
        for j, secret in ((0, first), (1, second)):
            entries[(i, j)] = KeyPair(secret=secret, public=fingerprint(code, secret, form))
    logger.debug(f"Generated {len(entries)} key pairs for n_msg={n_msg}")
    return KeyPairSet(n_msg=n_msg, entries=entries)


def verify_keypairs(keys: KeyPairSet, code: CodeSpec, form: Optional[str] = None) -> bool:
    """Every public state equals the fingerprint of its secret"""
    return all(
        pair.public.equals(fingerprint(code, pair.secret, form))
        for pair in keys.entries.values()
    )
