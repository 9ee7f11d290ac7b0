"""Losses, optimizers and the two-stage training loop.

Stage 1 fits the modulus template to the reference ladder unitary built
from the target's amplitude moduli; stage 2 freezes it and fits the phase
template to a special-unitary representative of the diagonal phase target.
The stages are never trained jointly.

Gradients for the Adam path come from exact parameter-shift rules: every
slot feeds a single RY or RZ, so state-overlap quantities are sinusoidal in
each parameter (shift +-pi/2, coefficient 1/2), and the trace term of the
Frobenius loss is sinusoidal in each half-angle (shift +-pi, coefficient
1/4).  Derived losses apply the chain rule on top.

Trace distance uses the factor-1/2 convention: for pure states
``T = sqrt(1 - F)``, so identical states are at 0 and orthogonal ones at 1.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, bind, run, unitary_of
from .exact import (
    ZERO_NODE_TOL,
    bst_build,
    ladder_reference_unitary,
    modulus_params_exact,
    natural_angles,
    phase_params_exact,
)
from .ladder import build_phase_template, build_modulus_template
from .qcore import StateVector, inner_product
from .statelib import haar_random_state
from . import circuit as circuit_mod


class LossKind(enum.Enum):
    FROBENIUS = "frobenius"
    TRACE_DISTANCE = "trace"
    FIDELITY = "fidelity"


STATE_LOSSES = frozenset({LossKind.TRACE_DISTANCE, LossKind.FIDELITY})


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.01
    epochs: int = 50
    batch_size: int = 64
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if min(self.learning_rate, self.epochs, self.batch_size) <= 0:
            raise ValueError("AdamConfig values must be positive")


@dataclass(frozen=True)
class NelderMeadConfig:
    target_error: float = 1e-15
    max_evals: int = 200_000
    simplex_scale: float = 0.05
    # Below this value a collapsed simplex counts as converged even above
    # target_error: the loss evaluation itself is float-noise limited there.
    noise_floor: float = 5e-13

    def __post_init__(self):
        if self.target_error <= 0 or self.max_evals <= 0 or self.simplex_scale <= 0:
            raise ValueError("NelderMeadConfig values must be positive")


@dataclass(frozen=True, eq=False)
class TrainReport:
    loss_curve: np.ndarray = field(repr=False)
    final_error: float
    wall_time: float
    evals: int


@dataclass(frozen=True, eq=False)
class TwoStageResult:
    circuit: Circuit
    global_phase: float
    theta_modulus: np.ndarray
    theta_phase: np.ndarray
    modulus_report: TrainReport
    phase_report: TrainReport
    final_error: float
    dataset_error: float


def frobenius_loss(u_ideal: np.ndarray, u_vqc: np.ndarray) -> float:
    """Frobenius norm of the difference of two matrices."""
    u_ideal = np.asarray(u_ideal)
    u_vqc = np.asarray(u_vqc)
    if u_ideal.shape != u_vqc.shape:
        raise ValueError(f"shape mismatch: {u_ideal.shape} vs {u_vqc.shape}")
    return float(np.linalg.norm(u_ideal - u_vqc))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Pure-state fidelity ``|<a|b>|**2``."""
    overlap = inner_product(a, b)
    return float(min(1.0, abs(overlap) ** 2))


def trace_distance(a: StateVector, b: StateVector) -> float:
    """Pure-state trace distance ``sqrt(1 - F)`` (factor-1/2 convention).

    Evaluated as the norm of ``|b> - <a|b>|a>``, which equals
    ``sqrt(1 - F)`` exactly but stays accurate when the states nearly
    coincide (the ``1 - F`` form bottoms out near ``sqrt(eps)``).
    """
    overlap = inner_product(a, b)
    return float(min(1.0, np.linalg.norm(b.amps - overlap * a.amps)))


def su_candidates(u: np.ndarray) -> list[np.ndarray]:
    """All ``2**n`` unit-determinant rescalings of a diagonal unitary."""
    u = np.asarray(u, dtype=np.complex128)
    dim = u.shape[0]
    diag = np.diag(u)
    if not np.allclose(u, np.diag(diag), atol=1e-10):
        raise ValueError("matrix is not diagonal")
    if not np.allclose(np.abs(diag), 1.0, atol=1e-10):
        raise ValueError("matrix is not unitary")
    delta = float(np.angle(np.prod(diag)))
    return [
        np.diag(diag * np.exp(-1j * (delta + 2.0 * np.pi * k) / dim))
        for k in range(dim)
    ]


def select_su_representative(phases: np.ndarray) -> tuple[np.ndarray, float]:
    """Mean-centered SU representative of ``diag(exp(i*phases))``.

    Among the unit-determinant rescalings this is the one whose phase
    vector has the smallest max-abs entry; the subtracted mean is returned
    as the global phase.
    """
    phases = np.asarray(phases, dtype=np.float64).reshape(-1)
    mean = float(phases.mean())
    return np.diag(np.exp(1j * (phases - mean))), mean


def scalar_gauge_shifts(n: int, n_slots: int, slot_range: range) -> np.ndarray:
    """Parameter shifts multiplying the realized unitary by ``exp(-2j*pi*k/2**n)``.

    Row ``k`` (``k = 0..2**n - 1``), added to a parameter vector whose
    ``slot_range`` feeds a full level-``n`` diagonal template, rescales the
    circuit's unitary by the ``k``-th root-of-unity conjugate.  These are the
    exact gauge moves of the ansatz: a scalar is a diagonal special unitary,
    so it folds into the diagonal slots without touching anything else.
    """
    from .zfactor import solve_z_params

    dim = 1 << n
    shifts = np.zeros((dim, n_slots))
    for k in range(1, dim):
        psi = np.full(dim, -2.0 * np.pi * k / dim)
        psi[:k] += 2.0 * np.pi  # exact zero sum
        theta, _ = solve_z_params(psi)
        shifts[k, list(slot_range)] = theta
    return shifts


class _StageProblem:
    """Loss/gradient evaluation for one template against one target matrix."""

    def __init__(self, template: Circuit, target: np.ndarray, loss: LossKind,
                 dataset: np.ndarray | None, gauge_shifts: np.ndarray | None = None):
        self.template = template
        self.target = np.asarray(target, dtype=np.complex128)
        self.loss = loss
        self.gauge_shifts = gauge_shifts
        self.dim = 1 << template.n_qubits
        if self.target.shape != (self.dim, self.dim):
            raise ValueError(
                f"target shape {self.target.shape} does not match template dim {self.dim}"
            )
        if loss in STATE_LOSSES:
            if dataset is None or dataset.size == 0:
                raise ValueError(f"{loss.value} loss requires a non-empty dataset")
            self.inputs = dataset  # (dim, m) columns
            self.ideal = self.target @ dataset
        else:
            self.inputs = None
            self.ideal = None
        self.evals = 0

    def unitary(self, theta: np.ndarray) -> np.ndarray:
        self.evals += 1
        return unitary_of(bind(self.template, theta))

    def _batch_fidelities(self, u: np.ndarray, cols) -> np.ndarray:
        vqc = u @ self.inputs[:, cols]
        overlaps = np.einsum("ij,ij->j", self.ideal[:, cols].conj(), vqc)
        return np.minimum(1.0, np.abs(overlaps) ** 2)

    def value(self, theta: np.ndarray, cols=slice(None)) -> float:
        u = self.unitary(theta)
        if self.loss is LossKind.FROBENIUS:
            value = float(np.linalg.norm(self.target - u))
        else:
            f = self._batch_fidelities(u, cols)
            per_sample = 1.0 - f if self.loss is LossKind.FIDELITY else np.sqrt(
                np.maximum(0.0, 1.0 - f)
            )
            value = float(per_sample.mean())
        if not np.isfinite(value):
            raise RuntimeError(
                f"non-finite {self.loss.value} loss at theta={np.array2string(theta, precision=4)}"
            )
        return value

    def value_and_grad(self, theta: np.ndarray, cols=slice(None)) -> tuple[float, np.ndarray]:
        n_params = theta.shape[0]
        grad = np.zeros(n_params)
        if self.loss is LossKind.FROBENIUS:
            u = self.unitary(theta)
            trace_re = float(np.real(np.vdot(self.target, u)))
            value = math.sqrt(max(0.0, 2.0 * self.dim - 2.0 * trace_re))
            for s in range(n_params):
                shifted = theta.copy()
                shifted[s] = theta[s] + math.pi
                r_plus = float(np.real(np.vdot(self.target, self.unitary(shifted))))
                shifted[s] = theta[s] - math.pi
                r_minus = float(np.real(np.vdot(self.target, self.unitary(shifted))))
                d_trace = (r_plus - r_minus) / 4.0
                grad[s] = -d_trace / max(value, 1e-12)
        else:
            f0 = self._batch_fidelities(self.unitary(theta), cols)
            if self.loss is LossKind.FIDELITY:
                value = float((1.0 - f0).mean())
                chain = -np.ones_like(f0)
            else:
                t = np.sqrt(np.maximum(0.0, 1.0 - f0))
                value = float(t.mean())
                chain = -1.0 / (2.0 * np.maximum(t, 1e-9))
            for s in range(n_params):
                shifted = theta.copy()
                shifted[s] = theta[s] + math.pi / 2.0
                f_plus = self._batch_fidelities(self.unitary(shifted), cols)
                shifted[s] = theta[s] - math.pi / 2.0
                f_minus = self._batch_fidelities(self.unitary(shifted), cols)
                grad[s] = float((chain * (f_plus - f_minus) / 2.0).mean())
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise RuntimeError(
                f"non-finite {self.loss.value} loss/gradient at "
                f"theta={np.array2string(theta, precision=4)}"
            )
        return value, grad

    @property
    def n_samples(self) -> int:
        return 0 if self.inputs is None else self.inputs.shape[1]

    def gauge_fold(self, theta: np.ndarray) -> np.ndarray | None:
        """Candidate that cancels a root-of-unity offset from the target.

        Only meaningful for the Frobenius loss (the state losses are global-
        phase invariant already).  Returns None when no offset is detected
        or no shift table is attached.
        """
        if self.gauge_shifts is None or self.loss is not LossKind.FROBENIUS:
            return None
        overlap = complex(np.vdot(self.target, self.unitary(theta)))
        if abs(overlap) < 1e-6 * self.dim:
            return None
        k = int(np.round(float(np.angle(overlap)) * self.dim / (2.0 * np.pi))) % self.dim
        if k == 0:
            return None
        return theta + self.gauge_shifts[k]


def _adam(problem: _StageProblem, init: np.ndarray, config: AdamConfig,
          rng: np.random.Generator, tol: float = 1e-15) -> tuple[np.ndarray, list[float]]:
    theta = init.copy()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    curve: list[float] = []
    best_theta, best_loss = theta.copy(), problem.value(theta)
    if best_loss <= tol:
        return best_theta, [best_loss]
    step = 0
    for _ in range(config.epochs):
        if problem.loss in STATE_LOSSES:
            order = rng.permutation(problem.n_samples)
            batches = [
                order[i : i + config.batch_size]
                for i in range(0, problem.n_samples, config.batch_size)
            ]
        else:
            batches = [slice(None)]
        stop = False
        for cols in batches:
            value, grad = problem.value_and_grad(theta, cols)
            curve.append(value)
            step += 1
            m = config.beta1 * m + (1.0 - config.beta1) * grad
            v = config.beta2 * v + (1.0 - config.beta2) * grad**2
            m_hat = m / (1.0 - config.beta1**step)
            v_hat = v / (1.0 - config.beta2**step)
            theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
            if value <= tol:
                stop = True
                break
        # keep the best epoch-end iterate under the full (non-batch) loss
        full = problem.value(theta)
        if full < best_loss:
            best_loss, best_theta = full, theta.copy()
        if stop or best_loss <= tol:
            break
    return best_theta, curve


def _nelder_mead(problem: _StageProblem, init: np.ndarray, config: NelderMeadConfig,
                 rng: np.random.Generator) -> tuple[np.ndarray, list[float]]:
    """Simplex search with reflect/expand/contract/shrink = 1, 2, 0.5, 0.5.

    When the simplex collapses above the target error, it is rebuilt around
    the best vertex with a progressively larger seeded offset; the best
    vertex is always kept, so the per-iteration best is non-increasing.
    """
    n_params = init.shape[0]

    def evaluate(x: np.ndarray) -> float:
        return problem.value(x)

    def make_simplex(center: np.ndarray, scale: float, jitter: bool) -> tuple[np.ndarray, np.ndarray]:
        points = [center]
        for i in range(n_params):
            x = center.copy()
            if jitter:
                x += scale * rng.uniform(-1.0, 1.0, size=n_params)
                x[i] += scale
            else:
                x[i] += scale
            points.append(x)
        xs = np.array(points)
        fs = np.array([evaluate(x) for x in xs])
        return xs, fs

    xs, fs = make_simplex(init, config.simplex_scale, jitter=False)
    curve: list[float] = [float(fs.min())]
    restart_scale = config.simplex_scale
    while fs.min() > config.target_error and problem.evals < config.max_evals:
        order = np.argsort(fs, kind="stable")
        xs, fs = xs[order], fs[order]
        spread = fs[-1] - fs[0]
        if spread <= max(1e-15, 1e-12 * fs[0]):
            if fs[0] <= config.noise_floor:
                break
            # Collapsed above the floor.  First try the exact gauge move
            # (the landscape has basins at every root-of-unity rescaling of
            # the target); otherwise rebuild around the best vertex with a
            # growing seeded offset.
            best_x, best_f = xs[0].copy(), fs[0]
            folded = problem.gauge_fold(best_x)
            if folded is not None and evaluate(folded) < best_f:
                restart_scale = config.simplex_scale
                xs, fs = make_simplex(folded, restart_scale, jitter=False)
            else:
                restart_scale = min(restart_scale * 4.0, 0.5 * math.pi)
                xs, fs = make_simplex(best_x, restart_scale, jitter=True)
                if fs.min() > best_f:
                    worst = int(np.argmax(fs))
                    xs[worst], fs[worst] = best_x, best_f
            curve.append(float(fs.min()))
            continue
        centroid = xs[:-1].mean(axis=0)
        reflected = centroid + (centroid - xs[-1])
        f_reflected = evaluate(reflected)
        if f_reflected < fs[0]:
            expanded = centroid + 2.0 * (centroid - xs[-1])
            f_expanded = evaluate(expanded)
            if f_expanded < f_reflected:
                xs[-1], fs[-1] = expanded, f_expanded
            else:
                xs[-1], fs[-1] = reflected, f_reflected
        elif f_reflected < fs[-2]:
            xs[-1], fs[-1] = reflected, f_reflected
        else:
            contracted = centroid + 0.5 * (xs[-1] - centroid)
            f_contracted = evaluate(contracted)
            if f_contracted < fs[-1]:
                xs[-1], fs[-1] = contracted, f_contracted
            else:
                for i in range(1, n_params + 1):
                    xs[i] = xs[0] + 0.5 * (xs[i] - xs[0])
                    fs[i] = evaluate(xs[i])
        curve.append(float(fs.min()))
    best = int(np.argmin(fs))
    return xs[best].copy(), curve


def train_stage(
    template: Circuit,
    target: np.ndarray,
    loss: LossKind,
    config: AdamConfig | NelderMeadConfig,
    dataset: list[StateVector] | np.ndarray | None = None,
    *,
    init: np.ndarray | None = None,
    seed: int = 0,
    gauge_shifts: np.ndarray | None = None,
) -> tuple[np.ndarray, TrainReport]:
    """Fit one template's parameters to one target matrix.

    ``dataset`` (required for the state losses, ignored by Frobenius) is a
    list of input states or a ``(dim, m)`` column matrix.  ``init`` defaults
    to seeded uniform values in [-0.1, 0.1].  ``gauge_shifts`` (see
    :func:`scalar_gauge_shifts`) lets the simplex search fold root-of-unity
    offsets instead of treating them as separate basins.
    """
    rng = np.random.default_rng(seed)
    block = _dataset_block(dataset, template.n_qubits) if loss in STATE_LOSSES else None
    problem = _StageProblem(template, target, loss, block, gauge_shifts)
    if init is None:
        init = rng.uniform(-0.1, 0.1, size=template.n_slots)
    else:
        init = np.asarray(init, dtype=np.float64).reshape(-1).copy()
        if init.shape[0] != template.n_slots:
            raise ValueError(f"init length {init.shape[0]} != {template.n_slots} slots")
    start = time.perf_counter()
    if isinstance(config, AdamConfig):
        theta, curve = _adam(problem, init, config, rng)
    elif isinstance(config, NelderMeadConfig):
        theta, curve = _nelder_mead(problem, init, config, rng)
    else:
        raise TypeError(f"unsupported optimizer config {type(config).__name__}")
    wall = time.perf_counter() - start
    bound = bind(template, theta)
    zero = StateVector.zero(template.n_qubits)
    prepared = run(bound, zero)
    ideal = StateVector.from_amplitudes(target @ zero.amps)
    report = TrainReport(
        loss_curve=np.asarray(curve),
        final_error=trace_distance(ideal, prepared),
        wall_time=wall,
        evals=problem.evals,
    )
    return theta, report


def _dataset_block(dataset, n_qubits: int) -> np.ndarray | None:
    if dataset is None:
        return None
    if isinstance(dataset, np.ndarray):
        return np.asarray(dataset, dtype=np.complex128)
    if not dataset:
        return None
    block = np.column_stack([s.amps for s in dataset])
    if block.shape[0] != 1 << n_qubits:
        raise ValueError("dataset states do not match the template's qubit count")
    return block


def make_dataset(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``(2**n, size)`` column matrix of Haar-random input states."""
    return np.column_stack([haar_random_state(n, rng).amps for _ in range(size)])


def two_stage_train(
    amplitudes,
    *,
    loss: LossKind,
    optimizer: str,
    seed: int = 0,
    adam: AdamConfig | None = None,
    nelder_mead: NelderMeadConfig | None = None,
    loss_phase: LossKind | None = None,
    optimizer_phase: str | None = None,
    dataset_size: int = 1000,
    warm_start: bool = False,
) -> TwoStageResult:
    """Train the modulus stage, freeze it, then train the phase stage.

    ``optimizer`` is ``"adam"`` or ``"nelder-mead"``; the phase stage reuses
    the modulus stage's loss/optimizer unless overridden.  All randomness
    (dataset, initializations, batching, simplex restarts) flows from
    ``seed``.  ``warm_start`` initializes each stage at the closed-form
    solution instead of random values.
    """
    target = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    n = target.shape[0].bit_length() - 1
    if 1 << n != target.shape[0] or n < 2:
        raise ValueError(f"amplitude length {target.shape[0]} is not 2**n with n >= 2")
    norm = float(np.linalg.norm(target))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"target norm {norm!r} is not 1 within 1e-9")
    target = target / norm
    loss_phase = loss_phase or loss
    optimizer_phase = optimizer_phase or optimizer
    adam = adam or AdamConfig()
    nelder_mead = nelder_mead or NelderMeadConfig()

    rng = np.random.default_rng(seed)
    moduli = np.abs(target)
    phases = np.where(moduli > ZERO_NODE_TOL, np.angle(target), 0.0)
    u_modulus = ladder_reference_unitary(n, natural_angles(bst_build(moduli)))
    su_phase, global_phase = select_su_representative(phases)

    need_data = loss in STATE_LOSSES or loss_phase in STATE_LOSSES
    block = make_dataset(n, dataset_size, rng) if need_data else None

    def stage(template, stage_target, stage_loss, stage_optimizer, stage_init, shifts):
        config = adam if stage_optimizer == "adam" else nelder_mead
        if stage_optimizer not in ("adam", "nelder-mead"):
            raise ValueError(f"unknown optimizer {stage_optimizer!r}")
        data = block if stage_loss in STATE_LOSSES else None
        return train_stage(
            template, stage_target, stage_loss, config, data,
            init=stage_init, seed=int(rng.integers(2**63)), gauge_shifts=shifts,
        )

    modulus_template = build_modulus_template(n)
    phase_template = build_phase_template(n)
    from .ladder import level_slot_range, n_modulus_slots, n_phase_slots

    modulus_shifts = scalar_gauge_shifts(n, n_modulus_slots(n), level_slot_range(n, n))
    phase_shifts = scalar_gauge_shifts(n, n_phase_slots(n), range(n_phase_slots(n)))
    init_modulus = modulus_params_exact(moduli) if warm_start else None
    theta_modulus, modulus_report = stage(
        modulus_template, u_modulus, loss, optimizer, init_modulus, modulus_shifts
    )
    init_phase = phase_params_exact(phases).theta_phase if warm_start else None
    theta_phase, phase_report = stage(
        phase_template, su_phase, loss_phase, optimizer_phase, init_phase, phase_shifts
    )

    full = circuit_mod.concat(
        bind(modulus_template, theta_modulus), bind(phase_template, theta_phase)
    )
    prepared = run(full, StateVector.zero(n))
    target_state = StateVector.from_amplitudes(target)
    final_error = trace_distance(target_state, prepared)

    if block is not None:
        sample = block[:, : min(100, block.shape[1])]
        ideal = (su_phase @ u_modulus) @ sample
        vqc = unitary_of(full) @ sample
        overlaps = np.einsum("ij,ij->j", ideal.conj(), vqc)
        dataset_error = float(
            np.mean(np.sqrt(np.maximum(0.0, 1.0 - np.minimum(1.0, np.abs(overlaps) ** 2))))
        )
    else:
        dataset_error = final_error

    return TwoStageResult(
        circuit=full,
        global_phase=global_phase,
        theta_modulus=theta_modulus,
        theta_phase=theta_phase,
        modulus_report=modulus_report,
        phase_report=phase_report,
        final_error=final_error,
        dataset_error=dataset_error,
    )
