"""Target-state corpus and distribution metrics.

State specs are small declarative descriptions (named families, explicit
amplitude lists, sparse entries, seeded Haar-random draws) that realize to
normalized :class:`~srbb_qsp.qcore.StateVector` values.  The JSON form uses
the fixed field names ``kind``, ``n`` and ``entries`` plus the kind-specific
``seed``, ``index`` and ``variant``.

The Hellinger distance here is the normalized convention
``sqrt(1 - sum(sqrt(p*q)))`` = ``(1/sqrt(2)) * ||sqrt(p) - sqrt(q)||_2``,
so identical distributions are at 0 and disjoint ones at 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .qcore import StateVector

KINDS = ("haar_random", "basis", "uniform", "bell", "ghz", "explicit", "sparse")
BELL_VARIANTS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


@dataclass(frozen=True)
class StateSpec:
    """Declarative description of a target state."""

    kind: str
    n: int
    seed: int | None = None
    index: int | None = None
    variant: str | None = None
    entries: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.entries is not None:
            object.__setattr__(
                self, "entries", tuple(tuple(float(x) for x in row) for row in self.entries)
            )


def haar_random_state(n: int, rng: np.random.Generator) -> StateVector:
    """One Haar-random pure state: i.i.d. complex Gaussians, normalized."""
    vec = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, vec / np.linalg.norm(vec))


def realize(spec: StateSpec) -> StateVector:
    """Materialize a spec into a normalized state vector."""
    n, dim = spec.n, 1 << spec.n
    if spec.kind == "haar_random":
        if spec.seed is None:
            raise ValueError("haar_random spec requires a seed")
        return haar_random_state(n, np.random.default_rng(spec.seed))
    if spec.kind == "basis":
        if spec.index is None:
            raise ValueError("basis spec requires an index")
        return StateVector.basis(n, spec.index)
    if spec.kind == "uniform":
        return StateVector(n, np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128))
    if spec.kind == "bell":
        if n != 2:
            raise ValueError("bell states are defined on n = 2")
        variant = spec.variant or "phi_plus"
        if variant not in BELL_VARIANTS:
            raise ValueError(f"unknown bell variant {variant!r}")
        vec = np.zeros(4, dtype=np.complex128)
        r = 1.0 / np.sqrt(2.0)
        if variant == "phi_plus":
            vec[0], vec[3] = r, r
        elif variant == "phi_minus":
            vec[0], vec[3] = r, -r
        elif variant == "psi_plus":
            vec[1], vec[2] = r, r
        else:
            vec[1], vec[2] = r, -r
        return StateVector(2, vec)
    if spec.kind == "ghz":
        vec = np.zeros(dim, dtype=np.complex128)
        vec[0] = vec[-1] = 1.0 / np.sqrt(2.0)
        return StateVector(n, vec)
    if spec.kind == "explicit":
        if spec.entries is None or len(spec.entries) != dim:
            raise ValueError(f"explicit spec needs {dim} [re, im] entries")
        vec = np.array([complex(re, im) for re, im in spec.entries])
        if np.linalg.norm(vec) == 0:
            raise ValueError("explicit entries are all zero")
        return StateVector.from_amplitudes(vec)
    # sparse
    if spec.entries is None or not spec.entries:
        raise ValueError("sparse spec needs [index, re, im] entries")
    vec = np.zeros(dim, dtype=np.complex128)
    for idx, re, im in spec.entries:
        i = int(idx)
        if not 0 <= i < dim:
            raise ValueError(f"sparse index {i} out of range for n={n}")
        vec[i] = complex(re, im)
    if np.linalg.norm(vec) == 0:
        raise ValueError("sparse entries are all zero")
    return StateVector.from_amplitudes(vec)


def spec_to_json(spec: StateSpec) -> str:
    doc: dict = {"kind": spec.kind, "n": spec.n}
    if spec.seed is not None:
        doc["seed"] = spec.seed
    if spec.index is not None:
        doc["index"] = spec.index
    if spec.variant is not None:
        doc["variant"] = spec.variant
    if spec.entries is not None:
        doc["entries"] = [list(row) for row in spec.entries]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def spec_from_json(text: str) -> StateSpec:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "kind" not in doc or "n" not in doc:
        raise ValueError('state spec JSON must be an object with "kind" and "n"')
    entries = doc.get("entries")
    return StateSpec(
        kind=doc["kind"],
        n=int(doc["n"]),
        seed=doc.get("seed"),
        index=doc.get("index"),
        variant=doc.get("variant"),
        entries=tuple(tuple(row) for row in entries) if entries is not None else None,
    )


def hellinger(p, q) -> float:
    """Normalized Hellinger distance between two distributions, in [0, 1]."""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape[0]} vs {q.shape[0]}")
    for name, dist in (("p", p), ("q", q)):
        if np.any(dist < -1e-12):
            raise ValueError(f"{name} has negative entries")
        if abs(dist.sum() - 1.0) > 1e-9:
            raise ValueError(f"{name} sums to {dist.sum()!r}, not 1 within 1e-9")
    diff = np.sqrt(np.clip(p, 0.0, None)) - np.sqrt(np.clip(q, 0.0, None))
    return float(min(1.0, np.linalg.norm(diff) / np.sqrt(2.0)))


@dataclass(frozen=True, eq=False)
class HaarSummary:
    n: int
    count: int
    mean_probs: np.ndarray
    expected: float
    stderr: float
    max_sigmas: float

    @property
    def ok(self) -> bool:
        return self.max_sigmas < 3.0


def haar_mean_check(n: int, count: int, seed: int) -> HaarSummary:
    """Corpus sanity: per-component mean probability vs the flat 2**-n value.

    The per-component probability of a Haar state is Beta(1, 2**n - 1); its
    standard error over ``count`` draws is used to express the worst
    deviation in sigmas.
    """
    if count < 100:
        raise ValueError(f"need count >= 100, got {count}")
    rng = np.random.default_rng(seed)
    dim = 1 << n
    acc = np.zeros(dim)
    for _ in range(count):
        acc += np.abs(haar_random_state(n, rng).amps) ** 2
    mean_probs = acc / count
    expected = 1.0 / dim
    var = (dim - 1) / (dim**2 * (dim + 1))  # Beta(1, dim-1) variance
    stderr = float(np.sqrt(var / count))
    max_sigmas = float(np.max(np.abs(mean_probs - expected)) / stderr)
    return HaarSummary(n, count, mean_probs, expected, stderr, max_sigmas)
