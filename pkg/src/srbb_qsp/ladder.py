"""Assembly of the full state-preparation circuit and its count predictors.

The circuit has two parts.  The modulus part is an RY on qubit 0 followed,
for each level ``k = 2..n``, by a level-``k`` diagonal template dressed with
S-dagger/H before and H/S after on qubit ``k-1``; the dressing turns the
diagonal block into a uniformly controlled RY, so this part can shape any
vector of nonnegative amplitudes.  The phase part is one more level-``n``
diagonal template that imprints the amplitude phases.  An optional four-gate
tail realizes a global phase ``exp(i*phi)`` on the whole register.

Slot layout (frozen; optimizers and file formats depend on it):
``[RY head] ++ [level-2 slots] ++ ... ++ [level-n slots]`` for the modulus
circuit, and the level-``n`` slots again for the phase circuit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, GateInstance, GateKind, Slot, bind, concat
from .zfactor import build_z_factor


@dataclass(frozen=True)
class CountPrediction:
    """Closed-form depth and gate counts of the assembled circuit."""

    depth: int
    n_rot: int
    n_cnot: int


@dataclass(frozen=True, eq=False)
class QSPTemplate:
    """Modulus and phase templates for ``n`` qubits, built once and bound often."""

    n: int
    modulus: Circuit
    phase: Circuit

    @property
    def n_modulus_slots(self) -> int:
        return self.modulus.n_slots

    @property
    def n_phase_slots(self) -> int:
        return self.phase.n_slots


def n_modulus_slots(n: int) -> int:
    return (1 << (n + 1)) - n - 2


def n_phase_slots(n: int) -> int:
    return (1 << n) - 1


def level_slot_range(n: int, k: int) -> range:
    """Slot indices of level ``k`` inside the modulus slot vector.

    Slot 0 is the RY head; level ``k`` owns the next ``2**k - 1`` slots,
    levels in ascending order.
    """
    if not 2 <= k <= n:
        raise ValueError(f"level k must be in 2..{n}, got {k}")
    start = 1 + sum((1 << j) - 1 for j in range(2, k))
    return range(start, start + (1 << k) - 1)


def build_modulus_template(n: int) -> Circuit:
    """Amplitude-shaping circuit template with ``2**(n+1) - n - 2`` slots."""
    if n < 2:
        raise ValueError(f"need n >= 2 qubits, got {n}")
    gates: list[GateInstance] = [GateInstance(GateKind.RY, (0,), Slot(0))]
    offset = 1
    for k in range(2, n + 1):
        wire = k - 1
        gates.append(GateInstance(GateKind.SDG, (wire,)))
        gates.append(GateInstance(GateKind.H, (wire,)))
        for g in build_z_factor(k).circuit.gates:
            if isinstance(g.angle, Slot):
                gates.append(GateInstance(g.kind, g.qubits, Slot(g.angle.index + offset)))
            else:
                gates.append(g)
        offset += (1 << k) - 1
        gates.append(GateInstance(GateKind.H, (wire,)))
        gates.append(GateInstance(GateKind.S, (wire,)))
    return Circuit(n, tuple(gates), n_slots=offset)


def build_phase_template(n: int) -> Circuit:
    """Phase-imprinting circuit template: the level-``n`` diagonal template."""
    if n < 2:
        raise ValueError(f"need n >= 2 qubits, got {n}")
    return build_z_factor(n).circuit


def build_qsp_template(n: int) -> QSPTemplate:
    return QSPTemplate(n, build_modulus_template(n), build_phase_template(n))


def predicted_counts(n: int) -> CountPrediction:
    """Closed-form depth/rotation/CNOT counts for the assembled circuit."""
    if n < 2:
        raise ValueError(f"need n >= 2 qubits, got {n}")
    depth = 6 * (1 << n) - (n * n + 7 * n) // 2 - 3
    n_rot = 3 * (1 << n) - n - 3
    n_cnot = 3 * (1 << n) - 2 * n - 4
    return CountPrediction(depth=depth, n_rot=n_rot, n_cnot=n_cnot)


def global_phase_tail(phi: float, n_qubits: int) -> Circuit:
    """Four-gate sequence on qubit 0 acting as ``exp(i*phi)`` times identity."""
    gates = (
        GateInstance(GateKind.RZ, (0,), 2.0 * phi),
        GateInstance(GateKind.X, (0,)),
        GateInstance(GateKind.PHASESHIFT, (0,), 2.0 * phi),
        GateInstance(GateKind.X, (0,)),
    )
    return Circuit(n_qubits, gates, 0)


def assemble_full(
    n: int,
    theta_modulus,
    theta_phase,
    global_phase: float | None = None,
) -> Circuit:
    """Bind and concatenate modulus, phase and (optionally) the phase tail."""
    theta_modulus = np.asarray(theta_modulus, dtype=np.float64).reshape(-1)
    theta_phase = np.asarray(theta_phase, dtype=np.float64).reshape(-1)
    if theta_modulus.shape[0] != n_modulus_slots(n):
        raise ValueError(
            f"modulus expects {n_modulus_slots(n)} parameters, got {theta_modulus.shape[0]}"
        )
    if theta_phase.shape[0] != n_phase_slots(n):
        raise ValueError(
            f"phase expects {n_phase_slots(n)} parameters, got {theta_phase.shape[0]}"
        )
    parts = [
        bind(build_modulus_template(n), theta_modulus),
        bind(build_phase_template(n), theta_phase),
    ]
    if global_phase is not None:
        parts.append(global_phase_tail(float(global_phase), n))
    return concat(*parts)
