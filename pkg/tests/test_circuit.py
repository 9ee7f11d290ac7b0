import math
from pathlib import Path

import numpy as np
import pytest

from srbb_qsp import (
    Circuit,
    GateInstance,
    GateKind,
    Slot,
    StateVector,
    bind,
    build_z_factor,
    read_qasm,
    run,
    stats,
    to_qasm,
    unitary_of,
)
from srbb_qsp.circuit import QasmParseError, UnboundSlotError, gate_matrix

from conftest import random_state_vec

GOLDEN = Path(__file__).parent / "data" / "golden.qasm"


def rz4(theta, qubit):
    """Independent 4x4 embedding of RZ via explicit kron."""
    rz = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    return np.kron(rz, np.eye(2)) if qubit == 0 else np.kron(np.eye(2), rz)


CNOT4 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


class TestGateInstance:
    def test_cnot_needs_two_distinct_qubits(self):
        with pytest.raises(ValueError):
            GateInstance(GateKind.CNOT, (0,))
        with pytest.raises(ValueError):
            GateInstance(GateKind.CNOT, (1, 1))

    def test_rotation_requires_angle(self):
        with pytest.raises(ValueError, match="angle"):
            GateInstance(GateKind.RY, (0,))

    def test_fixed_gate_rejects_angle(self):
        with pytest.raises(ValueError, match="no angle"):
            GateInstance(GateKind.H, (0,), 0.3)

    def test_circuit_validates_indices(self):
        with pytest.raises(ValueError, match="outside"):
            Circuit(1, (GateInstance(GateKind.H, (1,)),))
        with pytest.raises(ValueError, match="slot"):
            Circuit(1, (GateInstance(GateKind.RZ, (0,), Slot(0)),), n_slots=0)


class TestBind:
    def test_empty_noop(self):
        c = Circuit(1, (), 0)
        assert bind(c, []) == c

    def test_rz_zero_is_identity_action(self):
        c = Circuit(1, (GateInstance(GateKind.RZ, (0,), Slot(0)),), 1)
        np.testing.assert_allclose(unitary_of(bind(c, [0.0])), np.eye(2))

    def test_z_template_bound_against_hand_product(self):
        # five 4x4 factors multiplied explicitly, independent of unitary_of
        c = 0.7853
        t = build_z_factor(2)
        got = unitary_of(bind(t.circuit, [0.0, 0.0, c]))
        hand = CNOT4 @ rz4(c, 1) @ CNOT4 @ rz4(0.0, 1) @ rz4(0.0, 0)
        np.testing.assert_allclose(got, hand, atol=1e-12)
        np.testing.assert_allclose(
            got, np.diag(np.exp(1j * np.array([-c / 2, c / 2, c / 2, -c / 2]))), atol=1e-12
        )

    def test_length_mismatch(self):
        t = build_z_factor(2)
        with pytest.raises(ValueError, match="parameter"):
            bind(t.circuit, [0.0, 0.0])

    def test_slot_order_is_ascending_index(self):
        gates = (
            GateInstance(GateKind.RZ, (0,), Slot(1)),
            GateInstance(GateKind.RY, (0,), Slot(0)),
        )
        b = bind(Circuit(1, gates, 2), [0.25, 0.5])
        assert b.gates[0].angle == 0.5 and b.gates[1].angle == 0.25


class TestRun:
    def test_empty_circuit(self, rng):
        s = StateVector.from_amplitudes(random_state_vec(4, rng))
        np.testing.assert_allclose(run(Circuit(2, (), 0), s).amps, s.amps)

    def test_h_makes_plus(self):
        c = Circuit(1, (GateInstance(GateKind.H, (0,)),), 0)
        out = run(c, StateVector.zero(1))
        np.testing.assert_allclose(out.amps, [1, 1] / np.sqrt(2), atol=1e-15)

    def test_unbound_slot_rejected(self):
        c = Circuit(1, (GateInstance(GateKind.RZ, (0,), Slot(0)),), 1)
        with pytest.raises(UnboundSlotError):
            run(c, StateVector.zero(1))

    def test_run_matches_unitary(self, rng):
        # random bound circuits, n <= 4
        kinds = list(GateKind)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            gates = []
            for _ in range(12):
                kind = kinds[rng.integers(len(kinds))]
                if kind is GateKind.CNOT:
                    if n == 1:
                        continue
                    q = tuple(rng.choice(n, size=2, replace=False))
                    gates.append(GateInstance(kind, q))
                else:
                    angle = float(rng.uniform(-np.pi, np.pi))
                    has_angle = kind in (GateKind.RY, GateKind.RZ, GateKind.PHASESHIFT)
                    gates.append(
                        GateInstance(kind, (int(rng.integers(n)),),
                                     angle if has_angle else None)
                    )
            c = Circuit(n, tuple(gates), 0)
            vec = random_state_vec(1 << n, rng)
            via_run = run(c, StateVector.from_amplitudes(vec)).amps
            via_mat = unitary_of(c) @ vec
            np.testing.assert_allclose(via_run, via_mat, atol=1e-10)


class TestUnitaryOf:
    def test_empty_is_identity(self):
        np.testing.assert_allclose(unitary_of(Circuit(2, (), 0)), np.eye(4))

    def test_x_gate(self):
        c = Circuit(1, (GateInstance(GateKind.X, (0,)),), 0)
        np.testing.assert_allclose(unitary_of(c), [[0, 1], [1, 0]])

    def test_rz_sign_convention(self):
        phi = 0.37
        c = Circuit(1, (GateInstance(GateKind.RZ, (0,), phi),), 0)
        np.testing.assert_allclose(
            unitary_of(c), np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)]), atol=1e-15
        )

    def test_phaseshift_convention(self):
        phi = 1.1
        np.testing.assert_allclose(
            gate_matrix(GateKind.PHASESHIFT, phi), np.diag([1.0, np.exp(1j * phi)])
        )


class TestStats:
    def test_empty(self):
        s = stats(Circuit(3, (), 0))
        assert (s.depth, s.n_cnot, s.n_rot, s.n_other) == (0, 0, 0, 0)

    def test_parallel_rotations_then_cnot(self):
        gates = (
            GateInstance(GateKind.RZ, (0,), 0.1),
            GateInstance(GateKind.RZ, (1,), 0.2),
            GateInstance(GateKind.CNOT, (0, 1)),
        )
        s = stats(Circuit(2, gates, 0))
        assert (s.depth, s.n_cnot, s.n_rot) == (2, 1, 2)

    def test_full_circuit_counts_at_n3(self):
        from srbb_qsp import assemble_full

        full = assemble_full(3, np.zeros(11), np.zeros(7))
        s = stats(full)
        assert s.n_cnot == 14 and s.n_rot == 18

    def test_single_qubit_gates_cost_a_layer(self):
        gates = (GateInstance(GateKind.SDG, (0,)), GateInstance(GateKind.H, (0,)))
        assert stats(Circuit(1, gates, 0)).depth == 2

    def test_depth_invariant_under_rebinding(self, rng):
        t = build_z_factor(3)
        template_depth = stats(t.circuit).depth
        for _ in range(5):
            bound = bind(t.circuit, rng.uniform(-3, 3, 7))
            assert stats(bound).depth == template_depth


class TestQasm:
    def test_header_and_simple_gates(self):
        c = Circuit(1, (GateInstance(GateKind.H, (0,)),), 0)
        text = to_qasm(c)
        assert text.startswith("OPENQASM 3.0;\n")
        assert "h q[0];" in text

    def test_cnot_line(self):
        c = Circuit(2, (GateInstance(GateKind.CNOT, (0, 1)),), 0)
        assert "cx q[0], q[1];" in to_qasm(c)

    def test_pi_serialization(self):
        c = Circuit(2, (GateInstance(GateKind.RZ, (1,), math.pi),), 0)
        assert "rz(pi) q[1];" in to_qasm(c)

    def test_angle_seventeen_digits_roundtrip(self):
        angle = 1 / 3
        c = Circuit(1, (GateInstance(GateKind.RZ, (0,), angle),), 0)
        text = to_qasm(c)
        assert f"rz({angle:.17g}) q[0];" in text
        assert read_qasm(text).gates[0].angle == angle

    def test_unbound_rejected(self):
        c = Circuit(1, (GateInstance(GateKind.RZ, (0,), Slot(0)),), 1)
        with pytest.raises(UnboundSlotError):
            to_qasm(c)

    def test_golden_file(self):
        golden = GOLDEN.read_text()
        parsed = read_qasm(golden)
        assert to_qasm(parsed) == golden
        assert parsed.gates == read_qasm(to_qasm(parsed)).gates

    def test_roundtrip_identical_gate_list(self, rng):
        t = build_z_factor(3)
        c = bind(t.circuit, rng.uniform(-np.pi, np.pi, 7))
        again = read_qasm(to_qasm(c))
        assert again.n_qubits == c.n_qubits
        assert again.gates == c.gates

    def test_parse_rejects_garbage(self):
        with pytest.raises(QasmParseError):
            read_qasm("OPENQASM 2.0;\nqreg q[2];")
        with pytest.raises(QasmParseError):
            read_qasm("OPENQASM 3.0;\nqubit[2] q;\nccx q[0], q[1];")
        with pytest.raises(QasmParseError):
            read_qasm("OPENQASM 3.0;\nqubit[2] q;\nh(0.3) q[0];")
