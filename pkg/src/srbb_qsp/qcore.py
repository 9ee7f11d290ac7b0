"""Dense statevector kernel for small qubit registers.

Amplitudes are numpy ``complex128`` vectors of length ``2**n``.  Qubit 0 is
the top wire and the *most significant* bit of the basis index, so the basis
state |q0 q1 ... q_{n-1}> has index ``q0*2^(n-1) + ... + q_{n-1}``.  All
operations are functional: inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Norm slack accepted on input vectors before internal renormalization.
INPUT_NORM_ATOL = 1e-9


def _as_complex_vector(amps) -> np.ndarray:
    vec = np.asarray(amps, dtype=np.complex128).reshape(-1).copy()
    if not np.all(np.isfinite(vec.view(np.float64))):
        raise ValueError("amplitudes must be finite (no NaN/Inf)")
    return vec


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``n_qubits`` qubits."""

    n_qubits: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        vec = _as_complex_vector(self.amps)
        if vec.shape[0] != 1 << self.n_qubits:
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes, got {vec.shape[0]}"
            )
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > INPUT_NORM_ATOL:
            raise ValueError(f"state norm {norm!r} is not 1 within {INPUT_NORM_ATOL}")
        vec.flags.writeable = False
        object.__setattr__(self, "amps", vec)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        """|0...0> on ``n_qubits`` qubits."""
        return cls.basis(n_qubits, 0)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        if not 0 <= index < (1 << n_qubits):
            raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
        vec = np.zeros(1 << n_qubits, dtype=np.complex128)
        vec[index] = 1.0
        return cls(n_qubits, vec)

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        """Build a state from amplitudes, renormalizing within the input slack."""
        vec = _as_complex_vector(amps)
        n = vec.shape[0].bit_length() - 1
        if 1 << n != vec.shape[0]:
            raise ValueError(f"amplitude count {vec.shape[0]} is not a power of two")
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        if abs(norm - 1.0) > INPUT_NORM_ATOL:
            raise ValueError(f"state norm {norm!r} is not 1 within {INPUT_NORM_ATOL}")
        return cls(n, vec / norm)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def _apply_to_block(block: np.ndarray, gate: np.ndarray, targets, n_qubits: int) -> np.ndarray:
    """Apply ``gate`` to the row index of ``block`` (shape ``(2**n, m)``).

    The row index is treated as ``n_qubits`` binary digits, qubit 0 most
    significant; ``targets`` selects the digits the gate acts on, in the
    gate's own significance order (first target = gate's high bit).
    """
    k = len(targets)
    m = block.shape[1]
    tensor = block.reshape([2] * n_qubits + [m])
    moved = np.moveaxis(tensor, targets, range(k))
    shape = moved.shape
    out = gate @ moved.reshape(1 << k, -1)
    out = np.moveaxis(out.reshape(shape), range(k), targets)
    return out.reshape(1 << n_qubits, m)


def apply_gate(state: StateVector, gate: np.ndarray, targets) -> StateVector:
    """Evolve ``state`` by a 1- or 2-qubit ``gate`` on ``targets``.

    ``gate`` is a 2x2 or 4x4 unitary; for two targets, the first listed
    qubit is the gate's most significant index (so a controlled gate's
    control is ``targets[0]``).
    """
    targets = tuple(int(t) for t in targets)
    gate = np.asarray(gate, dtype=np.complex128)
    if len(set(targets)) != len(targets):
        raise ValueError(f"target qubits must be distinct, got {targets}")
    for t in targets:
        if not 0 <= t < state.n_qubits:
            raise ValueError(f"target qubit {t} out of range for {state.n_qubits} qubits")
    if gate.shape != (1 << len(targets), 1 << len(targets)):
        raise ValueError(
            f"gate shape {gate.shape} does not match {len(targets)} target qubit(s)"
        )
    out = _apply_to_block(state.amps[:, None], gate, targets, state.n_qubits)
    return StateVector(state.n_qubits, out[:, 0])


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b> with conjugation on the first argument."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    return complex(np.vdot(a.amps, b.amps))


def probabilities(state: StateVector) -> np.ndarray:
    """Born-rule distribution ``|amps|**2`` over basis states."""
    return np.abs(state.amps) ** 2


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor acts on the higher-significance qubits."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def is_unitary(matrix: np.ndarray, atol: float = 1e-10) -> bool:
    """Debug/test check that ``matrix`` is unitary within ``atol``."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    eye = np.eye(matrix.shape[0])
    return bool(np.allclose(matrix @ matrix.conj().T, eye, atol=atol))
