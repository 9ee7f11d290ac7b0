"""Scalable CNOT/RZ circuit for diagonal special-unitary operators.

The construction realizes any ``diag(exp(i*phi_k))`` with ``sum(phi) = 0``
using ``2**n - 1`` RZ gates and ``2**n - 2`` CNOTs.  Each RZ acts on the
parity of a distinct nonempty qubit subset, so the angle-to-phase relation
is an explicit linear map (:class:`PhaseMap`) whose columns are Walsh
characters scaled by -1/2; those columns are orthogonal, which makes the
inverse problem (:func:`solve_z_params`) a plain least-squares solve.

Gate layout: subsets are emitted level by level.  Level 1 is a bare RZ on
qubit 0; level ``k`` appends the ``2**(k-1)`` subsets containing qubit
``k-1``, walked in cyclic reflected-Gray-code order over the control
qubits so consecutive subsets share all but one CNOT.  The case-n circuit
therefore embeds the case-(n-1) circuit as the subsequence acting on
qubits ``0..n-2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, GateInstance, GateKind, Slot


@dataclass(frozen=True)
class ParameterIndexing:
    """Bijection between slots, algebra labels and parity subsets.

    Slot ``s`` carries the parameter labeled ``(s+2)**2 - 1`` in the
    ``j**2 - 1`` indexing of the diagonal generators (``j = 2..2**n``), and
    acts on the parity of ``masks[s]`` (bit ``q`` set means qubit ``q`` is
    in the subset).  The slot order is the Gray-code emission order.
    """

    n: int
    masks: tuple[int, ...]

    def slot_for(self, j: int) -> int:
        if not 2 <= j <= (1 << self.n):
            raise ValueError(f"j must be in 2..{1 << self.n}, got {j}")
        return j - 2

    def algebra_label(self, slot: int) -> int:
        return (slot + 2) ** 2 - 1


@dataclass(frozen=True, eq=False)
class ZFactorTemplate:
    """Diagonal-SU circuit template with one slot per parity subset."""

    n: int
    circuit: Circuit
    indexing: ParameterIndexing

    @property
    def n_slots(self) -> int:
        return self.circuit.n_slots


@dataclass(frozen=True, eq=False)
class PhaseMap:
    """Linear map ``theta -> phases`` of a Z-factor template.

    ``matrix`` has shape ``(2**n, 2**n - 1)`` with entries in {-1/2, +1/2};
    binding the template at ``theta`` realizes ``diag(exp(i*(matrix @ theta)))``.
    """

    n: int
    matrix: np.ndarray = field(repr=False)


class PhaseSumError(ValueError):
    """Target phases do not sum to 0 modulo 2*pi (not special-unitary)."""

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(
            f"phase sum is {residual:+.3e} away from 0 (mod 2*pi); "
            "target is not special-unitary"
        )


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def build_z_factor(n: int) -> ZFactorTemplate:
    """Build the diagonal-SU template on ``n >= 2`` qubits.

    For ``n = 2`` the emitted sequence is RZ(q0) and RZ(q1) in parallel,
    CNOT(0,1), RZ(q1), CNOT(0,1); each further level appends its new block
    after the embedded case-(n-1) gates.
    """
    if n < 2:
        raise ValueError(f"Z factor needs n >= 2 qubits, got {n}")
    gates: list[GateInstance] = [GateInstance(GateKind.RZ, (0,), Slot(0))]
    masks: list[int] = [1 << 0]
    slot = 1
    for k in range(2, n + 1):
        target = k - 1
        m = k - 1  # control bits in the Gray walk
        gates.append(GateInstance(GateKind.RZ, (target,), Slot(slot)))
        masks.append(1 << target)
        slot += 1
        prev = 0
        for i in range(1, (1 << m) + 1):
            code = _gray(i % (1 << m))
            toggled_bit = (prev ^ code).bit_length() - 1
            # Gray bit b drives control qubit k-2-b: the first toggle then
            # lands on the most recent wire, which stacks the block's layers
            # directly after the embedded case-(k-1) circuit.
            control = target - 1 - toggled_bit
            gates.append(GateInstance(GateKind.CNOT, (control, target)))
            if i < (1 << m):
                qubit_mask = (1 << target) | sum(
                    1 << (target - 1 - b) for b in range(m) if code >> b & 1
                )
                gates.append(GateInstance(GateKind.RZ, (target,), Slot(slot)))
                masks.append(qubit_mask)
                slot += 1
            prev = code
    circ = Circuit(n, tuple(gates), n_slots=slot)
    return ZFactorTemplate(n, circ, ParameterIndexing(n, tuple(masks)))


def _tracked_parities(template: ZFactorTemplate) -> list[int]:
    """Parity subset seen by each RZ, recovered by walking the gate list.

    Wire ``w`` starts holding the parity {w}; a CNOT xors the control's
    parity into the target's.  Returned in slot order.
    """
    wire = [1 << q for q in range(template.n)]
    by_slot: dict[int, int] = {}
    for g in template.circuit.gates:
        if g.kind is GateKind.CNOT:
            c, t = g.qubits
            wire[t] ^= wire[c]
        elif g.kind is GateKind.RZ:
            by_slot[g.angle.index] = wire[g.qubits[0]]
        else:
            raise ValueError(f"unexpected gate {g.kind.name} in Z-factor template")
    return [by_slot[s] for s in range(template.circuit.n_slots)]


def phase_map(n: int) -> PhaseMap:
    """Angle-to-phase matrix of :func:`build_z_factor` for ``n`` qubits.

    Computed structurally from the gate list: an RZ(theta) whose wire holds
    parity ``p`` adds ``-theta/2 * (-1)**p(x)`` to the phase of basis state
    ``x``.  Qubit ``q`` reads bit ``n-1-q`` of the basis index.
    """
    template = build_z_factor(n)
    dim = 1 << n
    parities = _tracked_parities(template)
    matrix = np.empty((dim, dim - 1), dtype=np.float64)
    x = np.arange(dim)
    for s, qubit_mask in enumerate(parities):
        index_mask = 0
        for q in range(n):
            if qubit_mask >> q & 1:
                index_mask |= 1 << (n - 1 - q)
        parity = _popcount_parity(x & index_mask)
        # -1/2*(-1)**p: -1/2 on even parity, +1/2 on odd.
        matrix[:, s] = np.where(parity, 0.5, -0.5)
    return PhaseMap(n, matrix)


def _popcount_parity(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out.astype(bool)


def solve_z_params(
    target_phases, *, atol: float = 1e-8
) -> tuple[np.ndarray, float]:
    """Angles realizing ``diag(exp(i*phi))`` up to a reported global phase.

    ``target_phases`` must sum to 0 modulo 2*pi.  The vector is re-centered
    by its mean so the sum is exactly 0, the re-centered system is solved by
    least squares, and the discarded mean is returned as the global-phase
    remainder: binding the template at the returned angles realizes
    ``exp(-i*remainder) * diag(exp(i*phi))``.
    """
    phases = np.asarray(target_phases, dtype=np.float64).reshape(-1)
    dim = phases.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim or n < 2:
        raise ValueError(f"phase vector length {dim} is not 2**n with n >= 2")
    total = float(phases.sum())
    residual = _mod_2pi_residual(total)
    if abs(residual) > atol:
        raise PhaseSumError(residual)
    mean = total / dim
    centered = phases - mean
    a = phase_map(n).matrix
    theta, *_ = np.linalg.lstsq(a, centered, rcond=None)
    return theta, mean


def _mod_2pi_residual(total: float) -> float:
    """Signed distance of ``total`` from the nearest multiple of 2*pi."""
    two_pi = 2.0 * np.pi
    return float(total - two_pi * np.round(total / two_pi))
