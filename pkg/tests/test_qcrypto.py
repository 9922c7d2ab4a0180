# tests/test_qcrypto.py
import itertools

import numpy as np
import pytest

from qdsig.core.exceptions import KeyExhaustedError, KeyLengthError
from qdsig.models.codes import CodeFamilyKey, Syndrome
from qdsig.models.keys import ClassicalKey, DerivedX, QotpKey
from qdsig.models.quantum import StateVector
from qdsig.services import qcrypto
from qdsig.services.quantum_core import density_matrix, fidelity, random_state, trace_distance
from qdsig.utils.bits import bits_from_str


class TestQotp:
    def test_zero_key_is_identity(self, rng):
        s = random_state(3, rng)
        assert qcrypto.qotp_encrypt(s, QotpKey((0,) * 6)).equals(s)

    def test_round_trip(self, rng):
        s = random_state(3, rng)
        for _ in range(10):
            key = QotpKey(rng.bits(6))
            assert qcrypto.qotp_decrypt(qcrypto.qotp_encrypt(s, key), key).equals(s)

    def test_x_then_z_order(self):
        out = qcrypto.qotp_encrypt(StateVector.from_label("0"), QotpKey((1, 1)))
        # Z X |0> = Z |1> = -|1>
        np.testing.assert_allclose(out.amplitudes, [0, -1], atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2])
    def test_average_over_keys_is_maximally_mixed(self, n, rng):
        s = random_state(n, rng)
        keys = list(itertools.product((0, 1), repeat=2 * n))
        rho = sum(density_matrix(qcrypto.qotp_encrypt(s, QotpKey(k))) for k in keys) / len(keys)
        assert trace_distance(rho, np.eye(2 ** n) / 2 ** n) <= 1e-10

    def test_wrong_key_on_basis_state(self):
        s = StateVector.from_label("0")
        cipher = qcrypto.qotp_encrypt(s, QotpKey((1, 0)))
        assert fidelity(qcrypto.qotp_decrypt(cipher, QotpKey((0, 0))), s) == pytest.approx(0.0)

    def test_key_size_check(self, rng):
        with pytest.raises(KeyLengthError):
            qcrypto.qotp_encrypt(random_state(2, rng), QotpKey((0, 1)))

    def test_odd_key_rejected(self):
        with pytest.raises(KeyLengthError):
            QotpKey((0, 1, 1))


class TestClassicalOtp:
    def test_consumes_fresh_segments(self):
        alice = ClassicalKey("K_TB", bits_from_str("10110011"))
        bob = alice.copy()
        c1 = qcrypto.otp_encrypt(alice, (1, 1, 1, 1), "C2")
        c2 = qcrypto.otp_encrypt(alice, (1, 1, 1, 1), "C3")
        assert c1 == (0, 1, 0, 0)
        assert c2 == (1, 1, 0, 0)
        assert qcrypto.otp_decrypt(bob, c1) == (1, 1, 1, 1)
        assert qcrypto.otp_decrypt(bob, c2) == (1, 1, 1, 1)
        assert alice.remaining == 0
        assert alice.used_by == {"C2": 4, "C3": 4}

    def test_exhaustion(self):
        key = ClassicalKey("K_AT", (0, 1, 0))
        with pytest.raises(KeyExhaustedError) as info:
            qcrypto.otp_encrypt(key, (1, 1, 1, 1))
        assert info.value.remaining == 3
        assert key.consumed == 0


class TestDerivedX:
    def test_example(self):
        derived = qcrypto.derive_X(QotpKey(bits_from_str("101100")), bits_from_str("10"))
        assert derived.bits == bits_from_str("001100")

    def test_zero_mask(self):
        x = QotpKey(bits_from_str("1101"))
        assert qcrypto.derive_X(x, (0, 0, 0, 0)).bits == x.bits

    def test_recover(self, rng):
        x = QotpKey(rng.bits(20))
        s = rng.bits(8)
        assert qcrypto.recover_x(qcrypto.derive_X(x, s), s) == x

    def test_mask_too_long(self):
        with pytest.raises(KeyLengthError):
            qcrypto.derive_X(QotpKey((0, 1)), (1, 1, 1))
        with pytest.raises(KeyLengthError):
            qcrypto.recover_x(DerivedX((0, 1)), (1, 1, 1))


class TestMessageCodecs:
    def test_c1(self, rng):
        s = Syndrome(rng.bits(8))
        k = CodeFamilyKey(rng.bits(8))
        x = QotpKey(rng.bits(20))
        bits = qcrypto.encode_c1(7, s, k, x)
        assert len(bits) == qcrypto.c1_length(8, 8, 20)
        assert qcrypto.decode_c1(bits) == (7, s, k, x)

    def test_c1_truncated(self, rng):
        bits = qcrypto.encode_c1(1, Syndrome((0, 1, 0, 1)), CodeFamilyKey((1,) * 8), QotpKey((0, 1)))
        with pytest.raises(KeyLengthError):
            qcrypto.decode_c1(bits[:-1])

    def test_c1_trailing(self):
        bits = qcrypto.encode_c1(1, Syndrome((0, 1, 0, 1)), CodeFamilyKey((1,) * 8), QotpKey((0, 1)))
        with pytest.raises(KeyLengthError):
            qcrypto.decode_c1(bits + (0,))

    def test_c2_and_syndrome_message(self, rng):
        k, x = CodeFamilyKey(rng.bits(8)), QotpKey(rng.bits(10))
        assert qcrypto.decode_c2(qcrypto.encode_c2(k, x)) == (k, x)
        s = Syndrome(rng.bits(4))
        bits = qcrypto.encode_syndrome_message(s)
        assert len(bits) == qcrypto.syndrome_message_length(4)
        assert qcrypto.decode_syndrome_message(bits) == s
