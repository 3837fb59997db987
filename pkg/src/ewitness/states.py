"""Density operators: validation, builtin families and random sampling."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, OversizedProblemError, ValidationError
from .linalg import check_dims, hermiticity_error, partial_trace
from .partitions import (
    Partition,
    ProductVector,
    block_layout,
    check_partition,
    random_unit_vectors,
)

STATE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated multipartite mixed state. Build it with :func:`validate`."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return len(self.dims)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def reduced(self, keep: Iterable[int]) -> "DensityOperator":
        keep = sorted(keep)
        return validate(
            partial_trace(self.matrix, self.dims, keep), [self.dims[i] for i in keep]
        )


def validate(matrix, dims: Sequence[int], tol: float = STATE_TOL) -> DensityOperator:
    """Return a :class:`DensityOperator` or raise :class:`ValidationError`.

    The error names the violated invariant and carries the measured value:
    the max Hermiticity deviation, the trace, or the lowest eigenvalue.
    """
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("dims", float("nan"), f"not a square matrix: {m.shape}")
    try:
        dims = check_dims(dims, m.shape[0])
    except (DimensionError, OversizedProblemError) as exc:
        raise ValidationError("dims", float(m.shape[0]), str(exc)) from exc
    if not np.all(np.isfinite(m)):
        raise ValidationError("finite", float("nan"), "matrix has non-finite entries")
    herm = hermiticity_error(m)
    if herm > tol:
        raise ValidationError("hermitian", herm, f"not Hermitian: deviation {herm:.3e}")
    m = (m + m.conj().T) / 2
    tr = float(np.real(np.trace(m)))
    if abs(tr - 1) > tol:
        raise ValidationError("trace", tr, f"trace is {tr!r}, expected 1")
    lam = float(np.linalg.eigvalsh(m)[0])
    if lam < -tol:
        raise ValidationError("psd", lam, f"negative eigenvalue {lam:.3e}")
    m.setflags(write=False)
    return DensityOperator(m, dims)


def projector(psi: np.ndarray, dims: Sequence[int]) -> DensityOperator:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return validate(np.outer(psi, psi.conj()), dims)


def maximally_mixed(dims: Sequence[int]) -> DensityOperator:
    d = prod(dims)
    return validate(np.eye(d) / d, dims)


def bell_vector() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def ghz_vector() -> np.ndarray:
    v = np.zeros(8, dtype=complex)
    v[0] = v[7] = 1 / np.sqrt(2)
    return v


def w_vector() -> np.ndarray:
    v = np.zeros(8, dtype=complex)
    v[[1, 2, 4]] = 1 / np.sqrt(3)
    return v


def bell_state() -> DensityOperator:
    """Two-qubit projector onto ``(|00> + |11>)/sqrt(2)``."""
    return projector(bell_vector(), (2, 2))


def ghz_state() -> DensityOperator:
    return projector(ghz_vector(), (2, 2, 2))


def w_state() -> DensityOperator:
    return projector(w_vector(), (2, 2, 2))


def _check_parameter(p: float) -> float:
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError(f"parameter must lie in [0, 1], got {p}")
    return p


def wghz_mixture(p: float) -> DensityOperator:
    """``(1 - p) |W><W| + p |GHZ><GHZ|`` on three qubits."""
    p = _check_parameter(p)
    w, g = w_vector(), ghz_vector()
    m = (1 - p) * np.outer(w, w.conj()) + p * np.outer(g, g.conj())
    return validate(m, (2, 2, 2))


def werner_state(p: float) -> DensityOperator:
    """``p |Phi+><Phi+| + (1 - p) I/4``; NPPT exactly when ``p > 1/3``."""
    p = _check_parameter(p)
    b = bell_vector()
    return validate(p * np.outer(b, b.conj()) + (1 - p) * np.eye(4) / 4, (2, 2))


def mix(rho: DensityOperator, sigma: DensityOperator, lam: float) -> DensityOperator:
    if rho.dims != sigma.dims:
        raise DimensionError(f"cannot mix dims {rho.dims} and {sigma.dims}")
    lam = _check_parameter(lam)
    return validate(lam * rho.matrix + (1 - lam) * sigma.matrix, rho.dims)


def conjugate(rho: DensityOperator, u: np.ndarray) -> DensityOperator:
    return validate(u @ rho.matrix @ u.conj().T, rho.dims)


def random_pure_state(dims: Sequence[int], seed=None) -> np.ndarray:
    """Normalized vector with i.i.d. standard complex Gaussian amplitudes."""
    dims = check_dims(dims)
    rng = np.random.default_rng(seed)
    return random_unit_vectors(rng, 1, prod(dims))[0]


def random_product_state(
    dims: Sequence[int], blocks: Iterable[Iterable[int]], seed=None
) -> ProductVector:
    """Independent uniformly random pure state on each block."""
    dims = check_dims(dims)
    part: Partition = check_partition(blocks, len(dims))
    rng = np.random.default_rng(seed)
    _, bdims = block_layout(dims, part)
    vecs = [random_unit_vectors(rng, 1, d)[0] for d in bdims]
    return ProductVector(dims, tuple(zip(part, vecs)))


def random_density_matrix(dims: Sequence[int], seed=None, rank: int | None = None):
    """Induced-measure random state ``G G^dagger / Tr`` with ``G`` Ginibre ``D x rank``."""
    dims = check_dims(dims)
    rng = np.random.default_rng(seed)
    d = prod(dims)
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    m = g @ g.conj().T
    return validate(m / np.trace(m).real, dims)


def random_separable_state(
    dims: Sequence[int], seed=None, terms: int | None = None
) -> DensityOperator:
    """Random convex mixture of fully product pure states.

    The default of ``2 D`` terms gives a full-rank state; with fewer than
    ``D`` terms the state is rank deficient and lies on the boundary of the
    separable set.
    """
    dims = check_dims(dims)
    rng = np.random.default_rng(seed)
    if terms is None:
        terms = 2 * prod(dims)
    weights = rng.dirichlet(np.ones(terms))
    singletons = [(i,) for i in range(len(dims))]
    m = np.zeros((prod(dims),) * 2, dtype=complex)
    for w in weights:
        v = random_product_state(dims, singletons, rng).assembled
        m += w * np.outer(v, v.conj())
    return validate(m, dims)


def haar_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_local_unitary(dims: Sequence[int], seed=None) -> np.ndarray:
    """``U_0 ⊗ U_1 ⊗ ...`` with independent Haar factors."""
    rng = np.random.default_rng(seed)
    u = np.eye(1, dtype=complex)
    for d in dims:
        u = np.kron(u, haar_unitary(d, rng))
    return u
