# tests/test_fingerprint.py
import itertools

import numpy as np
import pytest

from qdsig.core.config import settings
from qdsig.core.exceptions import CodeConstructionError, KeyLengthError
from qdsig.models.codes import CodeSpec
from qdsig.models.keys import SecretKey
from qdsig.services.fingerprint import (
    agreement, build_code, code_from_table, encode_classical, fingerprint, fingerprint_qubits,
    generate_keypairs, max_pairwise_agreement, verify_keypairs,
)
from qdsig.services.quantum_core import inner_product
from qdsig.utils.bits import int_to_bits
from qdsig.utils.random_stream import RandomStream


def all_fingerprints(code, form="register"):
    return [fingerprint(code, SecretKey(int_to_bits(v, code.w)), form) for v in range(2 ** code.w)]


class TestCodeTable:
    def test_disjoint_codewords_are_orthogonal(self):
        code = code_from_table(1, 4, [[0, 0, 0, 0], [1, 1, 1, 1]])
        assert code.delta == 0.0
        f0, f1 = all_fingerprints(code)
        assert abs(inner_product(f0, f1)) < 1e-12

    def test_half_agreement(self):
        code = code_from_table(1, 4, [[0, 0, 0, 0], [0, 0, 1, 1]])
        assert code.delta == 0.5
        f0, f1 = all_fingerprints(code)
        assert inner_product(f0, f1).real == pytest.approx(0.5)

    def test_rejects_duplicate_codewords(self):
        with pytest.raises(CodeConstructionError):
            code_from_table(1, 4, [[0, 1, 0, 1], [0, 1, 0, 1]])

    def test_rejects_wrong_shape(self):
        with pytest.raises(CodeConstructionError):
            code_from_table(1, 4, [[0, 0, 0, 0]])

    def test_agreement_count(self):
        assert agreement((0, 1, 1, 0), (0, 1, 0, 1)) == 2
        with pytest.raises(KeyLengthError):
            agreement((0, 1), (0, 1, 1))

    def test_gram_agreement_matches_pairwise(self):
        table = np.array([[0, 0, 1, 1], [0, 1, 0, 1], [1, 1, 1, 0]], dtype=np.uint8)
        brute = max(agreement(a, b) for a, b in itertools.combinations(table.tolist(), 2))
        assert max_pairwise_agreement(table) == brute


class TestBuildCode:
    @pytest.mark.parametrize("w", [4, 8])
    def test_overlap_bound_holds_exhaustively(self, w):
        code = build_code(w, 4, 0.75, RandomStream(3))
        assert code.m == 4 * w
        assert code.delta <= 0.75
        states = np.array([f.amplitudes for f in all_fingerprints(code)])
        gram = np.abs(states.conj() @ states.T)
        np.fill_diagonal(gram, 0.0)
        assert gram.max() <= code.delta + 1e-12

    def test_loose_target_succeeds(self):
        code = build_code(4, 4, 0.99, RandomStream(1))
        assert code.is_linear
        assert code.delta <= 0.99

    def test_deterministic_for_seed(self):
        a = build_code(4, 4, 0.75, RandomStream(8))
        b = build_code(4, 4, 0.75, RandomStream(8))
        assert np.array_equal(a.codewords, b.codewords)

    @pytest.mark.parametrize("w,c_rate,delta", [(0, 4, 0.5), (4, 1, 0.5), (4, 4, 0.0), (4, 4, 1.0)])
    def test_parameter_errors(self, w, c_rate, delta):
        with pytest.raises(CodeConstructionError):
            build_code(w, c_rate, delta, RandomStream(0))

    def test_impossible_target_reports_failure(self, monkeypatch):
        monkeypatch.setattr(settings, "CODE_SEARCH_ATTEMPTS", 50)
        with pytest.raises(CodeConstructionError) as info:
            build_code(4, 2, 0.05, RandomStream(0))
        assert info.value.w == 4

    def test_dict_round_trip(self, small_code):
        restored = CodeSpec.from_dict(small_code.to_dict())
        assert np.array_equal(restored.codewords, small_code.codewords)
        assert restored.delta == small_code.delta


class TestFingerprint:
    def test_register_form_size(self, small_code):
        assert fingerprint_qubits(small_code, "register") == 5
        assert fingerprint_qubits(small_code, "phase") == 4

    def test_phase_form_signed_overlap(self, small_code):
        u1, u2 = SecretKey((0, 0, 0, 1)), SecretKey((1, 0, 1, 1))
        a = agreement(encode_classical(small_code, u1), encode_classical(small_code, u2))
        m = small_code.m
        overlap = inner_product(fingerprint(small_code, u1, "phase"), fingerprint(small_code, u2, "phase"))
        assert overlap.real == pytest.approx((2 * a - m) / m)

    def test_wrong_secret_length(self, small_code):
        with pytest.raises(KeyLengthError):
            fingerprint(small_code, SecretKey((0, 1)))

    def test_unknown_form(self, small_code):
        with pytest.raises(CodeConstructionError):
            fingerprint(small_code, SecretKey((0, 0, 0, 0)), "bogus")


class TestKeyPairs:
    def test_layout_and_norms(self, small_code):
        keys = generate_keypairs(1, small_code, RandomStream(4))
        assert len(keys) == 4
        assert list(keys.indices()) == [(1, 0), (1, 1), (2, 0), (2, 1)]
        for i, j in keys.indices():
            assert np.linalg.norm(keys.public(i, j).amplitudes) == pytest.approx(1.0)
            assert len(keys.secret(i, j)) == small_code.w

    def test_block_secrets_differ(self, small_code):
        keys = generate_keypairs(3, small_code, RandomStream(5))
        for i in range(1, 7):
            assert keys.secret(i, 0) != keys.secret(i, 1)

    def test_reproducible(self, small_code):
        a = generate_keypairs(2, small_code, RandomStream(6))
        b = generate_keypairs(2, small_code, RandomStream(6))
        assert a.secret_keys() == b.secret_keys()

    def test_verify(self, small_code):
        keys = generate_keypairs(1, small_code, RandomStream(7))
        assert verify_keypairs(keys, small_code)

    def test_rejects_zero_messages(self, small_code):
        with pytest.raises(KeyLengthError):
            generate_keypairs(0, small_code, RandomStream(0))
