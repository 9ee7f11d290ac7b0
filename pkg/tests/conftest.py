import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state_vec(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def embed_oracle(gate: np.ndarray, targets, n: int) -> np.ndarray:
    """Embed a k-qubit gate into the full space by index arithmetic.

    Independent of the tensor-reshape path used by the package: each column
    is built by rewriting the target-qubit bits of the basis index (qubit 0
    is the most significant bit; the first target is the gate's high bit).
    """
    dim = 1 << n
    k = len(targets)
    full = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        tin = 0
        for i, q in enumerate(targets):
            tin = (tin << 1) | ((col >> (n - 1 - q)) & 1)
        for tout in range(1 << k):
            amp = gate[tout, tin]
            if amp == 0:
                continue
            row = col
            for i, q in enumerate(targets):
                bit = (tout >> (k - 1 - i)) & 1
                row = (row & ~(1 << (n - 1 - q))) | (bit << (n - 1 - q))
            full[row, col] += amp
    return full
