# tests/test_quantum_core.py
import numpy as np
import pytest

from qdsig.core.config import settings
from qdsig.core.exceptions import QuantumStateError
from qdsig.models.keys import SecretKey
from qdsig.models.quantum import PauliString, StateVector
from qdsig.services.fingerprint import code_from_table, fingerprint
from qdsig.services.quantum_core import (
    apply_pauli, density_matrix, expectation, fidelity, inner_product, measure_pauli,
    random_state, state_with_overlap, swap_test, swap_test_circuit_probability,
    swap_test_density_probability, swap_test_pass_probability, tensor, tensor_all,
)
from qdsig.utils.random_stream import RandomStream, derive_seed
from qdsig.utils.stats import binomial_sigma, within_sigma


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(QuantumStateError):
            StateVector(1, np.array([1.0, 1.0]))

    def test_rejects_wrong_length(self):
        with pytest.raises(QuantumStateError):
            StateVector(2, np.array([1.0, 0.0]))

    def test_qubit_cap(self):
        with pytest.raises(QuantumStateError):
            StateVector.basis(settings.MAX_QUBITS + 1, 0)

    def test_amplitudes_are_read_only(self):
        s = StateVector.from_label("0")
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0.0

    def test_pairs_round_trip(self, rng):
        s = random_state(3, rng)
        assert StateVector.from_pairs(s.to_pairs()).equals(s)

    def test_global_phase(self, rng):
        s = random_state(2, rng)
        rotated = StateVector(2, s.amplitudes * np.exp(0.7j))
        assert s.equals_up_to_phase(rotated)
        assert not s.equals(rotated)
        assert not s.equals_up_to_phase(random_state(2, rng))
        assert not s.equals_up_to_phase(random_state(3, rng))


class TestTensor:
    def test_basis_states(self):
        out = tensor(StateVector.from_label("0"), StateVector.from_label("1"))
        np.testing.assert_allclose(out.amplitudes, [0, 1, 0, 0], atol=1e-12)

    def test_plus_plus_is_uniform(self):
        out = tensor(StateVector.from_label("+"), StateVector.from_label("+"))
        np.testing.assert_allclose(out.amplitudes, [0.5] * 4, atol=1e-12)

    def test_inner_product_factorizes_over_fingerprints(self):
        code = code_from_table(1, 4, [[0, 0, 0, 0], [0, 0, 1, 1]])
        f0 = fingerprint(code, SecretKey((0,)), "register")
        f1 = fingerprint(code, SecretKey((1,)), "register")
        left = tensor(f0, f1)
        right = tensor(f0, f0)
        expected = inner_product(f0, f0) * inner_product(f1, f0)
        assert abs(inner_product(left, right) - expected) < 1e-12
        assert abs(expected - 0.5) < 1e-12

    def test_tensor_all_respects_cap(self):
        states = [StateVector.basis(5, 0)] * 5
        with pytest.raises(QuantumStateError):
            tensor_all(states)


class TestPauli:
    def test_x_on_zero(self):
        out = apply_pauli(PauliString.from_label("X"), StateVector.from_label("0"))
        assert out.equals(StateVector.from_label("1"))

    def test_z_on_plus(self):
        out = apply_pauli(PauliString.from_label("Z"), StateVector.from_label("+"))
        assert out.equals(StateVector.from_label("-"))

    def test_y_on_zero(self):
        out = apply_pauli(PauliString.from_label("Y"), StateVector.from_label("0"))
        np.testing.assert_allclose(out.amplitudes, [0, 1j], atol=1e-12)

    def test_matches_dense_matrix(self, rng):
        s = random_state(3, rng)
        for label in ("XYZ", "-iZZI", "+iYXX", "IIY"):
            p = PauliString.from_label(label)
            np.testing.assert_allclose(apply_pauli(p, s).amplitudes, p.to_matrix() @ s.amplitudes,
                                       atol=1e-12)

    def test_involution_up_to_sign(self, rng):
        s = random_state(3, rng)
        for label in ("XYZ", "ZIX", "YYY"):
            p = PauliString.from_label(label)
            twice = apply_pauli(p, apply_pauli(p, s))
            assert twice.equals(s)

    def test_product_matches_matrices(self):
        labels = ["XZ", "YY", "ZX", "-iXI", "IY"]
        for a in labels:
            for b in labels:
                p, q = PauliString.from_label(a), PauliString.from_label(b)
                np.testing.assert_allclose((p * q).to_matrix(), p.to_matrix() @ q.to_matrix(),
                                           atol=1e-12)

    def test_symplectic_commutation_rule(self):
        labels = ["XZZXI", "IXZZX", "YIIIZ", "ZZZZZ", "XXXXX"]
        for a in labels:
            for b in labels:
                p, q = PauliString.from_label(a), PauliString.from_label(b)
                pq, qp = p * q, q * p
                assert pq.x_bits == qp.x_bits and pq.z_bits == qp.z_bits
                assert (pq.phase_exp - qp.phase_exp) % 4 == 2 * p.symplectic(q)

    def test_associative(self):
        p, q, r = (PauliString.from_label(x) for x in ("XYZ", "ZZX", "YIY"))
        assert (p * q) * r == p * (q * r)

    def test_dimension_mismatch(self):
        with pytest.raises(QuantumStateError):
            apply_pauli(PauliString.from_label("XX"), StateVector.from_label("0"))


class TestInnerProduct:
    def test_self_overlap(self, rng):
        s = random_state(4, rng)
        assert abs(inner_product(s, s) - 1.0) < 1e-12

    def test_orthogonal_basis(self):
        assert inner_product(StateVector.from_label("0"), StateVector.from_label("1")) == 0

    def test_conjugate_linear_in_first(self):
        a = StateVector.from_amplitudes([1j, 0])
        b = StateVector.from_label("0")
        assert abs(inner_product(a, b) - (-1j)) < 1e-12

    def test_fingerprint_orthogonality(self):
        code = code_from_table(1, 4, [[0, 0, 0, 0], [1, 1, 1, 1]])
        f0 = fingerprint(code, SecretKey((0,)), "register")
        f1 = fingerprint(code, SecretKey((1,)), "register")
        assert abs(inner_product(f0, f1)) < 1e-12


class TestSwapTest:
    def test_closed_form_values(self, rng):
        a = random_state(3, rng)
        assert swap_test_pass_probability(a, a) == pytest.approx(1.0)
        assert swap_test_pass_probability(a, state_with_overlap(a, 0.0, rng)) == pytest.approx(0.5)
        assert swap_test_pass_probability(a, state_with_overlap(a, 0.25, rng)) == pytest.approx(0.53125)

    def test_circuit_oracle_agrees(self, rng):
        for overlap in (0.0, 0.25, 0.5, 0.9):
            a = random_state(2, rng)
            b = state_with_overlap(a, overlap, rng)
            closed = swap_test_pass_probability(a, b)
            assert swap_test_circuit_probability(a, b) == pytest.approx(closed, abs=1e-10)
            density = swap_test_density_probability(density_matrix(a), density_matrix(b))
            assert density == pytest.approx(closed, abs=1e-10)

    def test_identical_states_always_pass(self, rng):
        a = random_state(3, rng)
        assert all(swap_test(a, a, rng) for _ in range(2000))

    def test_statistics_match_closed_form(self, rng):
        a = random_state(3, rng)
        b = state_with_overlap(a, 0.5, rng)
        p = swap_test_pass_probability(a, b)
        trials = 4000
        rate = sum(swap_test(a, b, rng) for _ in range(trials)) / trials
        assert abs(rate - p) <= 4 * binomial_sigma(p, trials)

    def test_repetitions_multiply(self, rng):
        a = random_state(2, rng)
        b = state_with_overlap(a, 0.0, rng)
        trials = 4000
        rate = sum(swap_test(a, b, rng, repetitions=2) for _ in range(trials)) / trials
        assert abs(rate - 0.25) <= 4 * binomial_sigma(0.25, trials)

    def test_joint_blocks(self, rng):
        delta = 0.5
        pairs = []
        for _ in range(4):
            x = random_state(3, rng)
            pairs.append((x, state_with_overlap(x, delta, rng)))
        product = np.prod([swap_test_pass_probability(x, y) for x, y in pairs])
        assert product == pytest.approx(((1 + delta ** 2) / 2) ** 4)


class TestMeasurement:
    def test_z_on_zero(self, rng):
        value, post = measure_pauli(PauliString.from_label("Z"), StateVector.from_label("0"), rng)
        assert value == 1
        assert post.equals(StateVector.from_label("0"))

    def test_x_on_zero_is_fair(self, rng):
        trials = 4000
        plus = sum(measure_pauli(PauliString.from_label("X"), StateVector.from_label("0"), rng)[0] == 1
                   for _ in range(trials))
        assert abs(plus / trials - 0.5) <= 4 * binomial_sigma(0.5, trials)

    def test_repeat_gives_same_eigenvalue(self, rng):
        g = PauliString.from_label("XZY")
        for _ in range(20):
            value, post = measure_pauli(g, random_state(3, rng), rng)
            again, _ = measure_pauli(g, post, rng)
            assert again == value
            assert expectation(g, post) == pytest.approx(value)

    def test_rejects_non_hermitian(self, rng):
        with pytest.raises(QuantumStateError):
            measure_pauli(PauliString.from_label("iX"), StateVector.from_label("0"), rng)


class TestRandomStream:
    def test_reproducible(self):
        a, b = RandomStream(5), RandomStream(5)
        assert a.bits(64) == b.bits(64)
        assert a.random() == b.random()

    def test_spawn_is_label_keyed(self):
        parent = RandomStream(5)
        assert parent.spawn("x").seed == RandomStream(5).spawn("x").seed
        assert parent.spawn("x").seed != parent.spawn("y").seed
        assert parent.spawn("x").seed == derive_seed(5, "x")

    def test_random_states_are_normalized(self, rng):
        for n in range(1, 6):
            s = random_state(n, rng)
            assert fidelity(s, s) == pytest.approx(1.0)


class TestStats:
    def test_within_sigma(self):
        assert within_sigma(0.26, 0.25, 400)
        assert not within_sigma(0.40, 0.25, 400)
        assert within_sigma(0.0, 0.0, 10)
        assert not within_sigma(0.1, 0.0, 10)
