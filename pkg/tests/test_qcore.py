import numpy as np
import pytest

from srbb_qsp import StateVector, apply_gate, inner_product, kron, probabilities
from srbb_qsp.qcore import is_unitary

from conftest import embed_oracle, random_state_vec, random_unitary

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
I2 = np.eye(2, dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


class TestStateVector:
    def test_zero_state(self):
        s = StateVector.zero(3)
        assert s.amps[0] == 1.0 and np.all(s.amps[1:] == 0.0)

    def test_norm_validation(self):
        with pytest.raises(ValueError, match="norm"):
            StateVector(1, [1.0, 1.0])

    def test_renormalizes_small_slack(self):
        s = StateVector.from_amplitudes([1.0 + 5e-10, 0.0])
        assert abs(s.norm() - 1.0) < 1e-15

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            StateVector.from_amplitudes([np.nan, 0.0])

    def test_rejects_zero_vector(self):
        with pytest.raises(ValueError):
            StateVector.from_amplitudes([0.0, 0.0])

    def test_amps_read_only(self):
        s = StateVector.zero(2)
        with pytest.raises(ValueError):
            s.amps[0] = 0.5


class TestApplyGate:
    def test_x_flips_basis(self):
        out = apply_gate(StateVector.zero(1), X, [0])
        np.testing.assert_allclose(out.amps, [0, 1])

    def test_identity_keeps_state(self, rng):
        s = StateVector.from_amplitudes(random_state_vec(8, rng))
        out = apply_gate(s, I2, [1])
        np.testing.assert_allclose(out.amps, s.amps)

    def test_cnot_builds_bell(self):
        plus0 = StateVector.from_amplitudes([1, 0, 1, 0] / np.sqrt(2))
        out = apply_gate(plus0, CNOT, [0, 1])
        np.testing.assert_allclose(out.amps, np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_rejects_duplicate_targets(self):
        with pytest.raises(ValueError, match="distinct"):
            apply_gate(StateVector.zero(2), CNOT, [1, 1])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="range"):
            apply_gate(StateVector.zero(2), X, [2])

    def test_rejects_dim_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            apply_gate(StateVector.zero(2), CNOT, [0])

    def test_norm_preserved_bulk(self, rng):
        # 10^4 random (gate, state) pairs at n <= 5
        for _ in range(10_000):
            n = int(rng.integers(1, 6))
            k = 1 if n == 1 else int(rng.integers(1, 3))
            gate = random_unitary(1 << k, rng)
            targets = rng.choice(n, size=k, replace=False)
            state = StateVector.from_amplitudes(random_state_vec(1 << n, rng))
            out = apply_gate(state, gate, targets)
            assert abs(out.norm() - 1.0) < 1e-12

    def test_against_embed_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 4))
            k = 1 if n == 1 else int(rng.integers(1, 3))
            gate = random_unitary(1 << k, rng)
            targets = tuple(rng.choice(n, size=k, replace=False))
            vec = random_state_vec(1 << n, rng)
            out = apply_gate(StateVector.from_amplitudes(vec), gate, targets)
            expect = embed_oracle(gate, targets, n) @ vec
            np.testing.assert_allclose(out.amps, expect, atol=1e-12)

    def test_composition_matches_matrix_product(self, rng):
        # applying g2 after g1 equals one application of the embedded product
        for _ in range(100):
            n = 3
            k1, k2 = int(rng.integers(1, 3)), int(rng.integers(1, 3))
            g1, g2 = random_unitary(1 << k1, rng), random_unitary(1 << k2, rng)
            t1 = tuple(rng.choice(n, size=k1, replace=False))
            t2 = tuple(rng.choice(n, size=k2, replace=False))
            vec = random_state_vec(1 << n, rng)
            seq = apply_gate(apply_gate(StateVector.from_amplitudes(vec), g1, t1), g2, t2)
            product = embed_oracle(g2, t2, n) @ embed_oracle(g1, t1, n)
            np.testing.assert_allclose(seq.amps, product @ vec, atol=1e-10)

    def test_qubit_ordering_matches_kron(self, rng):
        # gate on qubit q equals I(2^q) (x) g (x) I(2^(n-1-q))
        n = 3
        g = random_unitary(2, rng)
        vec = random_state_vec(8, rng)
        for q in range(n):
            full = kron(np.eye(1 << q), kron(g, np.eye(1 << (n - 1 - q))))
            out = apply_gate(StateVector.from_amplitudes(vec), g, [q])
            np.testing.assert_allclose(out.amps, full @ vec, atol=1e-12)


class TestInnerProduct:
    def test_self_overlap_is_one(self, rng):
        s = StateVector.from_amplitudes(random_state_vec(4, rng))
        assert abs(inner_product(s, s) - 1.0) < 1e-12

    def test_orthogonal_basis_states(self):
        assert inner_product(StateVector.basis(1, 0), StateVector.basis(1, 1)) == 0

    def test_projection_on_plus(self):
        plus = StateVector.from_amplitudes([1, 1] / np.sqrt(2))
        got = inner_product(StateVector.basis(1, 0), plus)
        assert abs(got - 1 / np.sqrt(2)) < 1e-12

    def test_conjugates_first_argument(self, rng):
        a = StateVector.from_amplitudes(random_state_vec(4, rng))
        b = StateVector.from_amplitudes(random_state_vec(4, rng))
        assert abs(inner_product(a, b) - np.conj(inner_product(b, a))) < 1e-12

    def test_size_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            inner_product(StateVector.zero(1), StateVector.zero(2))


class TestProbabilities:
    def test_basis_state(self):
        np.testing.assert_allclose(probabilities(StateVector.zero(1)), [1, 0])

    def test_plus_state(self):
        plus = StateVector.from_amplitudes([1, 1] / np.sqrt(2))
        np.testing.assert_allclose(probabilities(plus), [0.5, 0.5])

    def test_reference_moduli(self):
        s = StateVector.from_amplitudes(np.sqrt([0.1, 0.2, 0.4, 0.3]))
        np.testing.assert_allclose(probabilities(s), [0.1, 0.2, 0.4, 0.3], atol=1e-15)

    def test_sums_to_one(self, rng):
        s = StateVector.from_amplitudes(random_state_vec(16, rng))
        assert abs(probabilities(s).sum() - 1.0) < 1e-12


class TestKron:
    def test_identity_product(self):
        np.testing.assert_allclose(kron(I2, I2), np.eye(4))

    def test_significance_convention(self):
        # first factor acts on the higher-significance qubit
        np.testing.assert_allclose(kron(Z, I2), np.diag([1, 1, -1, -1]))

    def test_hh_on_zero_gives_uniform(self):
        out = kron(H, H) @ np.array([1, 0, 0, 0], dtype=complex)
        np.testing.assert_allclose(out, np.full(4, 0.5), atol=1e-15)


def test_is_unitary_helper(rng):
    assert is_unitary(random_unitary(4, rng))
    assert not is_unitary(np.ones((2, 2)))
    assert not is_unitary(np.ones((2, 3)))
