"""Dense linear algebra on multipartite Hilbert spaces.

Subsystems are indexed from 0 and tensor order is row-major: the leftmost
factor is the most significant, so the basis state ``|i_0 i_1 ... i_{n-1}>``
sits at flat index ``sum_k i_k * prod(dims[k+1:])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionError,
    NotHermitianError,
    NumericalBreakdownError,
    OversizedProblemError,
)

MAX_DIM = 4096
HERMITIAN_TOL = 1e-9


def check_dims(dims: Sequence[int], size: int | None = None) -> tuple[int, ...]:
    """Normalize ``dims`` to a tuple and check it against a matrix size."""
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise DimensionError("at least one subsystem is required")
    if any(d < 2 for d in dims):
        raise DimensionError(f"local dimensions must be >= 2, got {dims}")
    total = prod(dims)
    if total > MAX_DIM:
        raise OversizedProblemError(f"total dimension {total} exceeds {MAX_DIM}")
    if size is not None and total != size:
        raise DimensionError(f"dims {dims} give {total}, operator has size {size}")
    return dims


def _square(m: np.ndarray, dims: Sequence[int]) -> tuple[np.ndarray, tuple[int, ...]]:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m, check_dims(dims, m.shape[0])


def _subsystems(indices: Iterable[int], n: int) -> list[int]:
    given = [int(i) for i in indices]
    out = sorted(set(given))
    if len(out) != len(given):
        raise DimensionError(f"repeated subsystem index in {given}")
    for i in out:
        if not 0 <= i < n:
            raise DimensionError(f"subsystem index {i} out of range for {n} parties")
    return out


def tensor_product(a: np.ndarray, b: np.ndarray, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with a guard on the resulting dimension."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] * b.shape[0] > max_dim:
        raise OversizedProblemError(
            f"product dimension {a.shape[0] * b.shape[0]} exceeds {max_dim}"
        )
    return np.kron(a, b)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems appear in increasing index order in the result.
    """
    m, dims = _square(m, dims)
    n = len(dims)
    keep = _subsystems(keep, n)
    if not keep:
        raise DimensionError("keep must name at least one subsystem")
    t = m.reshape(dims + dims)
    # trace from the highest index down so remaining axis positions stay valid
    for i in reversed(range(n)):
        if i in keep:
            continue
        width = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + width)
    d = prod(dims[i] for i in keep)
    return t.reshape(d, d)


def partial_transpose(
    m: np.ndarray, dims: Sequence[int], transposed: Iterable[int]
) -> np.ndarray:
    """Transpose the indices of the listed subsystems only."""
    m, dims = _square(m, dims)
    n = len(dims)
    axes = list(range(2 * n))
    for i in _subsystems(transposed, n):
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return m.reshape(dims + dims).transpose(axes).reshape(m.shape)


def hermiticity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian_eigensystem(
    m: np.ndarray, tol: float = HERMITIAN_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (increasing) and orthonormal eigenvectors (columns).

    Raises
    ------
    NotHermitianError
        If ``max |m - m^dagger|`` exceeds ``tol``.
    NumericalBreakdownError
        If LAPACK fails to converge.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    err = hermiticity_error(m)
    if err > tol:
        raise NotHermitianError(f"matrix deviates from Hermitian by {err:.3e}")
    try:
        return np.linalg.eigh((m + m.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdownError(str(exc)) from exc


def min_eigenvalue(m: np.ndarray) -> float:
    return float(hermitian_eigensystem(m)[0][0])


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        """Rebuild ``sum_i a_i |u_i> ⊗ |v_i>`` as a flat vector."""
        amp = (self.left_vectors * self.coefficients) @ self.right_vectors.T
        return amp.reshape(-1)


def schmidt_decompose(
    psi: np.ndarray, dims: Sequence[int], cutoff: float = 1e-12
) -> SchmidtDecomposition:
    """Schmidt decomposition of a normalized bipartite vector.

    Coefficients at or below ``cutoff`` are dropped, so a product state has
    a single coefficient.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    dims = tuple(dims)
    if len(dims) != 2:
        raise DimensionError(
            f"Schmidt decomposition needs exactly two parties, got {len(dims)}"
        )
    check_dims(dims, psi.size)
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > 1e-9:
        raise ValueError(f"state vector is not normalized (norm {norm:.12g})")
    u, s, vh = np.linalg.svd(psi.reshape(dims))
    k = max(1, int(np.count_nonzero(s > cutoff)))
    return SchmidtDecomposition(s[:k], u[:, :k], vh[:k].T)
