"""Closed-form compilation of a target state into ladder parameters.

The amplitude moduli are organized in a binary tree of partial norms; each
internal node yields one rotation angle via ``arccos(left/parent)``, and the
per-level angle lists drive the uniformly-controlled-RY ladder.  Those
doubled angles convert to diagonal phases (one ``(-t, +t)`` pair per control
pattern), which the diagonal-template solver inverts level by level.  Phases
of the amplitudes go through the same solver once, at full width, after
mean-centering; the discarded mean is the reported global phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .ladder import assemble_full, level_slot_range, n_modulus_slots
from .qcore import kron
from .zfactor import solve_z_params

ZERO_NODE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class AmplitudeBST:
    """Binary tree of partial l2-norms; ``levels[n]`` holds the moduli."""

    levels: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.levels) - 1

    @property
    def root(self) -> float:
        return float(self.levels[0][0])


@dataclass(frozen=True, eq=False)
class NaturalAngles:
    """Per-level rotation half-angles; level ``k`` holds ``2**(k-1)`` entries."""

    levels: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.levels)

    @property
    def head(self) -> float:
        return float(self.levels[0][0])

    def level(self, k: int) -> np.ndarray:
        return self.levels[k - 1]

    def total(self) -> int:
        return sum(len(v) for v in self.levels)


@dataclass(frozen=True, eq=False)
class PhaseSolution:
    theta_phase: np.ndarray
    global_phase: float


@dataclass(frozen=True, eq=False)
class ExactPreparation:
    """Compiled circuit (no tail) plus the parameters that built it."""

    circuit: Circuit
    global_phase: float
    theta_modulus: np.ndarray
    theta_phase: np.ndarray


def bst_build(moduli) -> AmplitudeBST:
    """Build the partial-norm tree of a nonnegative unit-norm vector."""
    leaves = np.asarray(moduli, dtype=np.float64).reshape(-1)
    n = leaves.shape[0].bit_length() - 1
    if 1 << n != leaves.shape[0] or n < 1:
        raise ValueError(f"moduli length {leaves.shape[0]} is not 2**n with n >= 1")
    if np.any(leaves < 0) or not np.all(np.isfinite(leaves)):
        raise ValueError("moduli must be finite and nonnegative")
    norm = float(np.linalg.norm(leaves))
    if norm == 0.0:
        raise ValueError("moduli are all zero")
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"moduli norm {norm!r} is not 1 within 1e-9")
    levels = [leaves / norm]
    while levels[-1].shape[0] > 1:
        v = levels[-1]
        levels.append(np.sqrt(v[0::2] ** 2 + v[1::2] ** 2))
    levels.reverse()
    return AmplitudeBST(tuple(levels))


def natural_angles(bst: AmplitudeBST) -> NaturalAngles:
    """Rotation half-angles, one per internal node, in [0, pi/2].

    The angle at a node is ``arccos(left_child / node)``; nodes at 0 get
    angle 0 (the whole subtree is unreachable, so any value is unobservable).
    """
    out = []
    for lvl in range(bst.n):
        parents = bst.levels[lvl]
        lefts = bst.levels[lvl + 1][0::2]
        angles = np.zeros_like(parents)
        alive = parents > ZERO_NODE_TOL
        ratios = np.clip(lefts[alive] / parents[alive], 0.0, 1.0)
        angles[alive] = np.arccos(ratios)
        out.append(angles)
    return NaturalAngles(tuple(out))


def _ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def ucg_reference(k: int, angles) -> np.ndarray:
    """Reference uniformly controlled RY on ``k`` qubits with doubled angles.

    Block-diagonal ``diag(RY(2*t_1), ..., RY(2*t_{2^(k-1)}))``: block ``j``
    acts on qubit ``k-1`` when qubits ``0..k-2`` are in basis state ``j``.
    """
    angles = np.asarray(angles, dtype=np.float64).reshape(-1)
    if angles.shape[0] != 1 << (k - 1):
        raise ValueError(f"level {k} needs {1 << (k - 1)} angles, got {angles.shape[0]}")
    out = np.zeros((1 << k, 1 << k), dtype=np.complex128)
    for j, t in enumerate(angles):
        out[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = _ry(2.0 * t)
    return out


def ladder_reference_unitary(n: int, angles: NaturalAngles) -> np.ndarray:
    """Product of the embedded reference ladder: the modulus-stage target."""
    dim = 1 << n
    u = kron(_ry(2.0 * angles.head), np.eye(dim // 2))
    for k in range(2, n + 1):
        u = kron(ucg_reference(k, angles.level(k)), np.eye(1 << (n - k))) @ u
    return u


def _multiplexed_rz_phases(doubled_angles: np.ndarray) -> np.ndarray:
    """Diagonal phases of ``diag(RZ(g_1), ..., RZ(g_m))``: pairs (-g/2, +g/2)."""
    half = np.asarray(doubled_angles, dtype=np.float64) / 2.0
    return np.stack([-half, half], axis=1).reshape(-1)


def modulus_params_exact(moduli) -> np.ndarray:
    """Modulus slot vector reproducing ``moduli`` on the all-zeros input."""
    angles = natural_angles(bst_build(moduli))
    n = angles.n
    params = np.zeros(n_modulus_slots(n))
    params[0] = 2.0 * angles.head
    for k in range(2, n + 1):
        phases = _multiplexed_rz_phases(2.0 * angles.level(k))
        theta, _ = solve_z_params(phases)
        params[list(level_slot_range(n, k))] = theta
    return params


def phase_params_exact(target_phases) -> PhaseSolution:
    """Phase slot vector for amplitude phases, plus the mean as global phase."""
    phases = np.asarray(target_phases, dtype=np.float64).reshape(-1)
    mean = float(phases.mean())
    theta, _ = solve_z_params(phases - mean, atol=np.inf)
    return PhaseSolution(theta_phase=theta, global_phase=mean)


def exact_prepare(amplitudes) -> ExactPreparation:
    """Compile a normalized complex amplitude vector into a bound circuit.

    The returned circuit maps |0...0> to the target up to the reported
    global phase; appending the phase tail at that value makes the match
    exact.  Phases on zero-modulus components are forced to 0 before the
    solve (they are unobservable).
    """
    target = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    n = target.shape[0].bit_length() - 1
    if 1 << n != target.shape[0] or n < 2:
        raise ValueError(f"amplitude length {target.shape[0]} is not 2**n with n >= 2")
    norm = float(np.linalg.norm(target))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"target norm {norm!r} is not 1 within 1e-9")
    target = target / norm
    moduli = np.abs(target)
    phases = np.where(moduli > ZERO_NODE_TOL, np.angle(target), 0.0)
    theta_modulus = modulus_params_exact(moduli)
    sol = phase_params_exact(phases)
    circ = assemble_full(n, theta_modulus, sol.theta_phase)
    return ExactPreparation(
        circuit=circ,
        global_phase=sol.global_phase,
        theta_modulus=theta_modulus,
        theta_phase=sol.theta_phase,
    )
