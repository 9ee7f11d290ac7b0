"""Gate-level circuit representation with named parameter slots.

A :class:`Circuit` is an immutable ordered gate list over ``n_qubits`` wires.
Rotation angles are either literal radians or :class:`Slot` references that
are resolved by :func:`bind`.  Execution, unitary reconstruction, statistics
(as-soon-as-possible depth, gate counts) and OpenQASM 3 export/import for the
emitted gate subset live here.

Conventions fixed once for the whole package:

* ``RZ(t) = diag(exp(-i t/2), exp(+i t/2))``
* ``PHASESHIFT(t) = diag(1, exp(i t))``
* two-qubit gates list the control first: ``CNOT`` flips ``qubits[1]``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from . import qcore
from .qcore import StateVector


class GateKind(enum.Enum):
    RY = "ry"
    RZ = "rz"
    H = "h"
    S = "s"
    SDG = "sdg"
    X = "x"
    PHASESHIFT = "p"
    CNOT = "cx"


PARAMETRIC_KINDS = frozenset({GateKind.RY, GateKind.RZ, GateKind.PHASESHIFT})
ROTATION_KINDS = frozenset({GateKind.RY, GateKind.RZ, GateKind.PHASESHIFT})
TWO_QUBIT_KINDS = frozenset({GateKind.CNOT})


@dataclass(frozen=True)
class Slot:
    """Reference to parameter slot ``index`` of the enclosing circuit."""

    index: int


@dataclass(frozen=True)
class GateInstance:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | Slot | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        n_expected = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != n_expected:
            raise ValueError(f"{self.kind.name} takes {n_expected} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind.name} qubits must be distinct, got {self.qubits}")
        if self.kind in PARAMETRIC_KINDS:
            if self.angle is None:
                raise ValueError(f"{self.kind.name} requires an angle or slot")
            if not isinstance(self.angle, Slot):
                object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind.name} carries no angle")

    @property
    def is_bound(self) -> bool:
        return not isinstance(self.angle, Slot)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[GateInstance, ...] = ()
    n_slots: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g.kind.name} uses qubit {q} outside 0..{self.n_qubits - 1}")
            if isinstance(g.angle, Slot) and not 0 <= g.angle.index < self.n_slots:
                raise ValueError(f"slot {g.angle.index} outside 0..{self.n_slots - 1}")

    @property
    def is_bound(self) -> bool:
        return all(g.is_bound for g in self.gates)

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class CircuitStats:
    depth: int
    n_cnot: int
    n_rot: int
    n_other: int

    @property
    def n_gates(self) -> int:
        return self.n_cnot + self.n_rot + self.n_other


class UnboundSlotError(ValueError):
    """An operation requiring literal angles saw an unbound slot."""


class QasmParseError(ValueError):
    """Input text is not in the OpenQASM subset this package emits."""


def gate_matrix(kind: GateKind, angle: float | None = None) -> np.ndarray:
    """Dense matrix of a gate kind (2x2, or 4x4 for CNOT)."""
    if kind in PARAMETRIC_KINDS:
        if angle is None or isinstance(angle, Slot):
            raise UnboundSlotError(f"{kind.name} has no literal angle")
        t = float(angle)
    if kind is GateKind.RY:
        c, s = math.cos(t / 2), math.sin(t / 2)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind is GateKind.RZ:
        return np.array(
            [[np.exp(-0.5j * t), 0.0], [0.0, np.exp(0.5j * t)]], dtype=np.complex128
        )
    if kind is GateKind.PHASESHIFT:
        return np.array([[1.0, 0.0], [0.0, np.exp(1j * t)]], dtype=np.complex128)
    if kind is GateKind.H:
        return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)
    if kind is GateKind.S:
        return np.array([[1.0, 0.0], [0.0, 1.0j]], dtype=np.complex128)
    if kind is GateKind.SDG:
        return np.array([[1.0, 0.0], [0.0, -1.0j]], dtype=np.complex128)
    if kind is GateKind.X:
        return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    if kind is GateKind.CNOT:
        m = np.eye(4, dtype=np.complex128)
        m[[2, 3]] = m[[3, 2]]
        return m
    raise ValueError(f"unknown gate kind {kind!r}")


def bind(circuit: Circuit, params) -> Circuit:
    """Replace every slot reference by its literal value from ``params``.

    ``params[i]`` feeds slot ``i``; the result has no remaining slots.
    """
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.shape[0] != circuit.n_slots:
        raise ValueError(
            f"expected {circuit.n_slots} parameter(s), got {params.shape[0]}"
        )
    gates = tuple(
        replace(g, angle=float(params[g.angle.index])) if isinstance(g.angle, Slot) else g
        for g in circuit.gates
    )
    return Circuit(circuit.n_qubits, gates, 0)


def _require_bound(circuit: Circuit):
    for g in circuit.gates:
        if not g.is_bound:
            raise UnboundSlotError(
                f"circuit has unbound slot {g.angle.index}; bind() it first"
            )


def run(circuit: Circuit, state: StateVector) -> StateVector:
    """Apply the gates left to right to ``state``."""
    _require_bound(circuit)
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, circuit {circuit.n_qubits}"
        )
    block = state.amps[:, None]
    for g in circuit.gates:
        block = qcore._apply_to_block(
            block, gate_matrix(g.kind, g.angle), g.qubits, circuit.n_qubits
        )
    return StateVector(circuit.n_qubits, block[:, 0])


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Full ``2**n x 2**n`` unitary of a bound circuit, in application order."""
    _require_bound(circuit)
    if circuit.n_qubits > 10:
        raise ValueError("unitary reconstruction is limited to 10 qubits")
    block = np.eye(1 << circuit.n_qubits, dtype=np.complex128)
    for g in circuit.gates:
        block = qcore._apply_to_block(
            block, gate_matrix(g.kind, g.angle), g.qubits, circuit.n_qubits
        )
    return block


def stats(circuit: Circuit) -> CircuitStats:
    """ASAP-layered depth and kind counts; every gate costs one layer on its wires."""
    wire_depth = [0] * circuit.n_qubits
    n_cnot = n_rot = n_other = 0
    for g in circuit.gates:
        layer = 1 + max(wire_depth[q] for q in g.qubits)
        for q in g.qubits:
            wire_depth[q] = layer
        if g.kind is GateKind.CNOT:
            n_cnot += 1
        elif g.kind in ROTATION_KINDS:
            n_rot += 1
        else:
            n_other += 1
    depth = max(wire_depth) if circuit.gates else 0
    return CircuitStats(depth=depth, n_cnot=n_cnot, n_rot=n_rot, n_other=n_other)


def _format_angle(angle: float) -> str:
    if angle == math.pi:
        return "pi"
    if angle == -math.pi:
        return "-pi"
    return f"{angle:.17g}"


def to_qasm(circuit: Circuit) -> str:
    """OpenQASM 3 text for a bound circuit, one gate per line."""
    _require_bound(circuit)
    lines = ["OPENQASM 3.0;", f"qubit[{circuit.n_qubits}] q;"]
    for g in circuit.gates:
        name = g.kind.value
        args = ", ".join(f"q[{q}]" for q in g.qubits)
        if g.kind in PARAMETRIC_KINDS:
            lines.append(f"{name}({_format_angle(g.angle)}) {args};")
        else:
            lines.append(f"{name} {args};")
    return "\n".join(lines) + "\n"


_KIND_BY_NAME = {k.value: k for k in GateKind}
_GATE_RE = re.compile(
    r"^(?P<name>[a-z]+)(?:\((?P<angle>[^)]+)\))?\s+(?P<args>q\[\d+\](?:,\s*q\[\d+\])*);$"
)


def _parse_angle(text: str) -> float:
    text = text.strip()
    if text == "pi":
        return math.pi
    if text == "-pi":
        return -math.pi
    try:
        return float(text)
    except ValueError as exc:
        raise QasmParseError(f"bad angle literal {text!r}") from exc


def read_qasm(text: str) -> Circuit:
    """Parse a program produced by :func:`to_qasm` back into a circuit.

    Only the emitted subset is accepted: the fixed header, one qubit
    register ``q``, and the gate set rz/ry/h/s/sdg/x/cx/p with literal
    angles.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "OPENQASM 3.0;":
        raise QasmParseError('missing "OPENQASM 3.0;" header')
    decl = re.fullmatch(r"qubit\[(\d+)\]\s+q;", lines[1] if len(lines) > 1 else "")
    if not decl:
        raise QasmParseError("missing qubit register declaration")
    n_qubits = int(decl.group(1))
    gates = []
    for line in lines[2:]:
        m = _GATE_RE.match(line)
        if not m:
            raise QasmParseError(f"unsupported statement: {line!r}")
        name = m.group("name")
        if name not in _KIND_BY_NAME:
            raise QasmParseError(f"unsupported gate {name!r}")
        kind = _KIND_BY_NAME[name]
        qubits = tuple(int(q) for q in re.findall(r"q\[(\d+)\]", m.group("args")))
        angle = None
        if m.group("angle") is not None:
            if kind not in PARAMETRIC_KINDS:
                raise QasmParseError(f"gate {name} takes no angle")
            angle = _parse_angle(m.group("angle"))
        elif kind in PARAMETRIC_KINDS:
            raise QasmParseError(f"gate {name} requires an angle")
        gates.append(GateInstance(kind, qubits, angle))
    return Circuit(n_qubits, tuple(gates), 0)


def concat(*circuits: Circuit) -> Circuit:
    """Concatenate bound circuits over the same register."""
    if not circuits:
        raise ValueError("need at least one circuit")
    n = circuits[0].n_qubits
    gates: list[GateInstance] = []
    for c in circuits:
        if c.n_qubits != n:
            raise ValueError("qubit count mismatch in concat")
        _require_bound(c)
        gates.extend(c.gates)
    return Circuit(n, tuple(gates), 0)
