"""Witness operators and the closed-form decomposable witness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, NotHermitianError
from .linalg import (
    HERMITIAN_TOL,
    check_dims,
    hermiticity_error,
    hermitian_eigensystem,
    partial_transpose,
)
from .partitions import (
    PartitionScheme,
    ProductVector,
    assemble_many,
    random_block_vectors,
)
from .states import DensityOperator

DEGENERACY_TOL = 1e-9
IMAG_TOL = 1e-10
SAMPLE_CHUNK = 20000


@dataclass(frozen=True, eq=False)
class Witness:
    """Hermitian operator normalized to unit trace."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix)
        check_dims(self.dims, m.shape[0])
        err = hermiticity_error(m)
        if err > HERMITIAN_TOL:
            raise NotHermitianError(f"witness deviates from Hermitian by {err:.3e}")
        tr = np.trace(m).real
        if abs(tr - 1) > 1e-9:
            raise ValueError(f"witness trace is {tr!r}, expected 1")

    @classmethod
    def normalized(cls, matrix: np.ndarray, dims: Sequence[int]) -> "Witness":
        m = np.asarray(matrix, dtype=complex)
        m = (m + m.conj().T) / 2
        tr = np.trace(m).real
        if tr <= 0:
            raise ValueError(f"cannot normalize an operator with trace {tr!r}")
        return cls(m / tr, tuple(dims))


@dataclass(frozen=True, eq=False)
class DecomposableWitness:
    """``p P + (1 - p) Q^{T_A}`` with ``P, Q`` positive semidefinite."""

    p: float
    P: np.ndarray
    Q: np.ndarray
    cut: tuple[int, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        for name, op in (("P", self.P), ("Q", self.Q)):
            lam = hermitian_eigensystem(op)[0][0]
            if lam < -DEGENERACY_TOL:
                raise ValueError(f"{name} is not positive (min eigenvalue {lam:.3e})")

    @property
    def matrix(self) -> np.ndarray:
        qt = partial_transpose(self.Q, self.dims, self.cut)
        return self.p * self.P + (1 - self.p) * qt

    def to_witness(self) -> Witness:
        return Witness.normalized(self.matrix, self.dims)


def evaluate(w: Witness, rho: DensityOperator) -> float:
    """Expectation ``Tr(W rho)``."""
    if tuple(w.dims) != tuple(rho.dims):
        raise DimensionError(f"witness dims {w.dims} differ from state dims {rho.dims}")
    val = np.sum(w.matrix.T * rho.matrix)
    if abs(val.imag) > IMAG_TOL:
        raise ValueError(f"Tr(W rho) has imaginary part {val.imag:.3e}")
    return float(val.real)


def _cut(rho: DensityOperator, cut: Iterable[int]) -> tuple[int, ...]:
    side = tuple(sorted({int(i) for i in cut}))
    if not side or len(side) >= rho.n or any(not 0 <= i < rho.n for i in side):
        raise DimensionError(f"cut {side} does not split {rho.n} parties in two")
    return side


def pt_spectrum(rho: DensityOperator, cut: Iterable[int]) -> np.ndarray:
    """Increasing eigenvalues of the partial transpose over ``cut``."""
    return hermitian_eigensystem(partial_transpose(rho.matrix, rho.dims, _cut(rho, cut)))[0]


def optimal_decomposable_witness(
    rho: DensityOperator, cut: Iterable[int]
) -> tuple[Witness, bool]:
    """Best decomposable witness for ``rho`` across ``cut``.

    Returns ``(W, detected)`` with ``W = P^{T_A} / Tr P`` where ``P`` projects
    onto the lowest eigenspace of ``rho^{T_A}`` (eigenvalues within 1e-9 of
    the minimum). ``detected`` is False when that eigenvalue is nonnegative;
    the witness is still returned.
    """
    side = _cut(rho, cut)
    lam, vecs = hermitian_eigensystem(partial_transpose(rho.matrix, rho.dims, side))
    low = vecs[:, lam <= lam[0] + DEGENERACY_TOL]
    proj = low @ low.conj().T
    w = partial_transpose(proj, rho.dims, side) / low.shape[1]
    return Witness.normalized(w, rho.dims), bool(lam[0] < 0)


def e_dw(rho: DensityOperator, cut: Iterable[int]) -> float:
    """Decomposable witnessed entanglement ``|min(lambda_min(rho^{T_A}), 0)|``."""
    return float(max(0.0, -pt_spectrum(rho, cut)[0]))


def negativity(rho: DensityOperator, cut: Iterable[int]) -> float:
    """Sum of the magnitudes of the negative partial-transpose eigenvalues."""
    lam = pt_spectrum(rho, cut)
    return float(-lam[lam < 0].sum())


def sample_product_vectors(
    dims: Sequence[int],
    scheme: PartitionScheme,
    samples: int,
    rng: np.random.Generator,
):
    """Yield ``(partition, block vectors, assembled)`` chunks, round-robin over
    the scheme's coarsest partitions."""
    parts = scheme.coarsest()
    counts = [samples // len(parts) + (i < samples % len(parts)) for i in range(len(parts))]
    for part, count in zip(parts, counts):
        while count > 0:
            k = min(count, SAMPLE_CHUNK)
            blocks = random_block_vectors(rng, dims, part, k)
            yield part, blocks, assemble_many(dims, part, blocks)
            count -= k


def sample_minimum(
    w: np.ndarray,
    dims: Sequence[int],
    scheme: PartitionScheme,
    samples: int,
    rng: np.random.Generator,
) -> tuple[float, ProductVector]:
    """Smallest ``<pi|W|pi>`` over ``samples`` random scheme-conforming products."""
    best, arg = np.inf, None
    for part, blocks, vecs in sample_product_vectors(dims, scheme, samples, rng):
        vals = np.einsum("ri,ij,rj->r", vecs.conj(), w, vecs).real
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            arg = ProductVector(tuple(dims), tuple(zip(part, (b[i] for b in blocks))))
    return best, arg


def is_witness_sampled(
    w: Witness,
    scheme: PartitionScheme,
    samples: int,
    seed=None,
    tol: float = 1e-9,
) -> tuple[float, ProductVector | None]:
    """Randomized positivity audit of ``w`` over scheme-conforming products.

    Returns the smallest ``<pi|W|pi>`` seen, and the minimizing product
    vector when that value is below ``-tol`` (otherwise None).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if scheme.n != len(w.dims):
        raise DimensionError(f"scheme has {scheme.n} parties, witness {len(w.dims)}")
    rng = np.random.default_rng(seed)
    best, arg = sample_minimum(w.matrix, w.dims, scheme, samples, rng)
    return best, (arg if best < -tol else None)
