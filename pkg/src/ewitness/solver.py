"""Optimal entanglement witnesses by cutting-plane linear programming.

A witness is written as ``W = I/D + sum_k x_k B_k`` over the traceless part
of an orthonormal Hermitian basis, so ``Tr W = 1`` holds by construction.
Each product vector ``pi`` allowed by the partition scheme contributes the
linear constraint ``<pi|W|pi> >= 0``. The LP minimizes ``Tr(W rho)`` over a
growing finite set of such constraints; a block-coordinate eigen-descent
oracle finds the most violated product vector and adds it as a cut.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import prod
from typing import Sequence

import numpy as np

from .errors import DimensionError
from .linalg import check_dims
from .lp import DenseDualSimplex
from .partitions import (
    Partition,
    PartitionScheme,
    ProductVector,
    assemble_many,
    block_layout,
    random_block_vectors,
)
from .states import DensityOperator
from .witness import Witness, sample_minimum

log = logging.getLogger(__name__)

ORACLE_TOL = 1e-10
ORACLE_SWEEPS = 200
TIE_TOL = 1e-12
# cut generation only needs a violated vector; certification runs full sweeps
CUT_SWEEPS = 40
# certification: witnesses near a separable state have values ~1e-6, where a
# 1e-10 per-sweep decrease is still far from the minimum
# restarts pile up in the same few minima; near copies only slow the LP and
# burn the max_cuts budget
CUT_OVERLAP = 0.99
MAX_NEW_CUTS = 20
AUDIT_SWEEPS = 2000
AUDIT_TOL = 1e-15
# e_w at or below this is numerical noise around a separable state
DETECTION_TOL = 1e-6
# weight of the LP iterate in the separation point (1 gives plain Kelley cuts)
SMOOTHING = 0.5
# relative LP cost perturbation against dual degeneracy; the bound is corrected for it
LP_PERTURBATION = 1e-9


@lru_cache(maxsize=16)
def _basis(d: int) -> np.ndarray:
    out = [np.eye(d, dtype=complex) / np.sqrt(d)]
    s = 1 / np.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = s
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k], anti[k, j] = -1j * s, 1j * s
            out += [sym, anti]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    b = np.array(out)
    b.setflags(write=False)
    return b


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis of ``d x d`` matrices, shape ``(d*d, d, d)``.

    The first element is ``I/sqrt(d)``; then come the off-diagonal pairs
    ``(E_jk + E_kj)/sqrt(2)`` and ``i(E_kj - E_jk)/sqrt(2)`` for ``j < k``,
    then the normalized traceless diagonal matrices. For ``d = 2`` this is
    ``(I, X, Y, Z)/sqrt(2)``.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    return _basis(int(d))


def hermitian_coordinates(ops: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real coordinates ``Tr(B_k X)`` of Hermitian ``X`` (batched over leading axes)."""
    d = basis.shape[-1]
    flat = ops.reshape(*ops.shape[:-2], d * d)
    return np.real(flat @ basis.transpose(0, 2, 1).reshape(len(basis), d * d).T)


def from_coordinates(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.tensordot(x, basis, axes=1)


# ---------------------------------------------------------------- oracle


def _lowest_eigvecs(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest eigenvalue and a deterministic eigenvector for stacked Hermitian ``m``.

    Degenerate lowest eigenspaces resolve to the member with the largest
    ``|first component|``; the phase makes the first nonzero entry real positive.
    """
    d = m.shape[-1]
    if d == 2:
        a, c = m[..., 0, 0].real, m[..., 1, 1].real
        b = m[..., 0, 1]
        lam = (a + c) / 2 - np.sqrt(((a - c) / 2) ** 2 + np.abs(b) ** 2)
        use_first = np.abs(lam - a) >= np.abs(lam - c)
        v = np.where(
            use_first[..., None],
            np.stack([b, (lam - a).astype(complex)], -1),
            np.stack([(lam - c).astype(complex), b.conj()], -1),
        )
        norm = np.linalg.norm(v, axis=-1, keepdims=True)
        flat = norm[..., 0] < 1e-300
        v = np.where(flat[..., None], np.array([1, 0], dtype=complex), v / np.where(flat[..., None], 1, norm))
    else:
        w, vecs = np.linalg.eigh(m)
        lam = w[..., 0]
        deg = (w - lam[..., None]) <= TIE_TOL * np.maximum(1.0, np.abs(lam[..., None]))
        # project e_0 onto the degenerate eigenspace
        proj = np.einsum("...ik,...k->...i", vecs, vecs[..., 0, :].conj() * deg)
        pn = np.linalg.norm(proj, axis=-1, keepdims=True)
        ok = pn[..., 0] > 1e-8
        v = np.where(ok[..., None], proj / np.where(ok[..., None], pn, 1), vecs[..., :, 0])
    lead = np.where(np.abs(v[..., 0]) > 1e-12, v[..., 0], v[..., 1])
    phase = lead / np.abs(lead)
    return lam, v * phase[..., None].conj()


@lru_cache(maxsize=64)
def _contraction(nblocks: int, j: int) -> str:
    rows = "abcdefghijkl"[:nblocks]
    cols = "ABCDEFGHIJKL"[:nblocks]
    ops = ["g" + rows + cols]
    for k in range(nblocks):
        if k != j:
            ops += ["gr" + rows[k], "gr" + cols[k]]
    return ",".join(ops) + "->gr" + rows[j] + cols[j]


def _group_layouts(dims, partitions):
    """Group partitions by block dimensions, blocks ordered largest first."""
    groups: dict[tuple[int, ...], list[Partition]] = {}
    for part in partitions:
        ordered = tuple(sorted(part, key=lambda b: (-prod(dims[p] for p in b), b)))
        _, bdims = block_layout(dims, ordered)
        groups.setdefault(bdims, []).append(ordered)
    return groups


@dataclass
class Candidate:
    value: float
    vector: ProductVector
    assembled: np.ndarray


def _descend(
    w: np.ndarray,
    dims: tuple[int, ...],
    partitions: Sequence[Partition],
    restarts: int,
    rng: np.random.Generator,
    init: Sequence[ProductVector] = (),
    sweeps: int = ORACLE_SWEEPS,
    tol: float = ORACLE_TOL,
) -> list[Candidate]:
    """Block-coordinate eigen-descent of ``<pi|W|pi>`` from many starting points.

    Returns one candidate per (partition, start), sorted by value.
    """
    n = len(dims)
    out: list[Candidate] = []
    for bdims, parts in _group_layouts(dims, partitions).items():
        nb = len(bdims)
        tensors = []
        for part in parts:
            order, _ = block_layout(dims, part)
            t = w.reshape(dims + dims).transpose(order + [n + p for p in order])
            tensors.append(t.reshape(bdims + bdims))
        t = np.stack(tensors)
        extras = [[pv for pv in init if set(pv.partition) == set(part)] for part in parts]
        total = restarts + max(len(e) for e in extras)
        starts = random_block_vectors(rng, dims, parts[0], len(parts) * total)
        vecs = [s.reshape(len(parts), total, -1) for s in starts]
        for g, (part, warm) in enumerate(zip(parts, extras)):
            for i, pv in enumerate(warm):
                blocks = dict(pv.blocks)
                for k, b in enumerate(part):
                    vecs[k][g, restarts + i] = blocks[b]
        prev = np.full(vecs[0].shape[:2], np.inf)
        for _ in range(sweeps):
            for j in range(nb):
                ops = [t]
                for k in range(nb):
                    if k != j:
                        ops += [vecs[k].conj(), vecs[k]]
                m = np.einsum(_contraction(nb, j), *ops)
                val, vecs[j] = _lowest_eigvecs(m)
            if np.all(prev - val < tol):
                break
            prev = val
        for g, part in enumerate(parts):
            block_vecs = [v[g] for v in vecs]
            full = assemble_many(dims, part, block_vecs)
            for r in range(full.shape[0]):
                pv = ProductVector(dims, tuple((b, v[r]) for b, v in zip(part, block_vecs)))
                out.append(Candidate(float(val[g, r]), pv, full[r]))
    out.sort(key=lambda c: c.value)
    return out


def violation_oracle(
    w: Witness,
    scheme: PartitionScheme,
    restarts: int = 20,
    seed=None,
) -> tuple[float, ProductVector]:
    """Approximate ``min <pi|W|pi>`` over product vectors conforming to ``scheme``.

    Heuristic: the returned value is an upper bound on the true minimum.
    """
    dims = tuple(w.dims)
    if scheme.n != len(dims):
        raise DimensionError(f"scheme has {scheme.n} parties, witness {len(dims)}")
    rng = np.random.default_rng(seed)
    best = _descend(np.asarray(w.matrix), dims, scheme.coarsest(), restarts, rng)[0]
    return best.value, best.vector


# ---------------------------------------------------------------- solver


@dataclass(frozen=True)
class WitnessProblem:
    rho: DensityOperator
    scheme: PartitionScheme
    eps_feasibility: float = 1e-6
    eps_objective: float = 1e-6
    max_cuts: int = 5000
    restarts: int = 20
    trust_bound: float | None = None
    seed: int = 0
    audit_samples: int = 100_000

    def __post_init__(self):
        if self.eps_feasibility <= 0 or self.eps_objective <= 0:
            raise ValueError("tolerances must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.scheme.n != self.rho.n:
            raise DimensionError(
                f"scheme has {self.scheme.n} parties, state has {self.rho.n}"
            )


@dataclass(eq=False)
class WitnessResult:
    witness: Witness
    e_w: float
    converged: bool
    cuts_used: int
    certificate: ProductVector
    certificate_value: float
    objective_history: list[float] = field(default_factory=list)

    @property
    def detected(self) -> bool:
        return self.e_w > DETECTION_TOL


_MAX_BOUND_DOUBLINGS = 30


def _expectations(w: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    return np.einsum("ri,ij,rj->r", vecs.conj(), w, vecs).real


def _shift(w: np.ndarray, v: float, d: int) -> np.ndarray:
    """Restore ``<pi|W|pi> >= 0`` at the oracle minimum ``v < 0`` keeping unit trace."""
    return (w - v * np.eye(d)) / (1 - v * d)


def solve(problem: WitnessProblem) -> WitnessResult:
    """Minimize ``Tr(W rho)`` over unit-trace witnesses of the problem's scheme.

    Converges when the oracle finds no product vector below
    ``-eps_feasibility``, or when the LP lower bound and the best
    feasibility-restored iterate agree within ``eps_objective``. A converged
    witness must also survive a fresh oracle pass and a randomized audit;
    violators found there become cuts and the loop continues.
    """
    rho, scheme = problem.rho, problem.scheme
    dims = check_dims(rho.dims, rho.dim)
    d = rho.dim
    eps = problem.eps_feasibility
    rng = np.random.default_rng(problem.seed)
    basis = hermitian_basis(d)[1:]
    cost = hermitian_coordinates(rho.matrix, basis)
    partitions = scheme.coarsest()
    identity = np.eye(d) / d

    def cut_rows(vectors: np.ndarray) -> np.ndarray:
        outer = vectors[:, :, None] * vectors[:, None, :].conj()
        return -hermitian_coordinates(outer, basis)

    bound = float(problem.trust_bound or d)
    lp = DenseDualSimplex(cost, bound, perturb=LP_PERTURBATION)
    seeds = []
    per = -(-10 * d * d // len(partitions))
    for part in partitions:
        seeds.append(assemble_many(dims, part, random_block_vectors(rng, dims, part, per)))
    seeds = np.concatenate(seeds)[: 10 * d * d]
    # product vectors overlapping rho most are where a witness for rho is
    # tightest; without them the cuts creep towards them one iteration at a time
    close = _descend(-np.asarray(rho.matrix), dims, partitions, problem.restarts, rng)
    seeds = np.concatenate([seeds, _fresh_cuts(close)])
    lp.add_rows(cut_rows(seeds), np.full(len(seeds), 1 / d))

    history: list[float] = []
    # best witness known feasible at every vector found so far; I/D always is
    best_w, best_f = identity, 1 / d
    cuts = 0
    doublings = 0
    warm: list[ProductVector] = []
    final = None

    while True:
        x = lp.solve()
        if lp.box_active and doublings < _MAX_BOUND_DOUBLINGS:
            bound *= 2
            doublings += 1
            lp.set_bound(bound)
            log.debug("trust bound raised to %g", bound)
            continue
        w = identity + from_coordinates(x, basis)
        f = float(cost @ x + 1 / d)
        bound_f = lp.lower_bound + 1 / d
        history.append(bound_f)
        # separate at a point between the LP iterate and best_w; the probe's
        # shift is a much better feasible witness than the LP iterate's
        probe = SMOOTHING * w + (1 - SMOOTHING) * best_w
        fp = SMOOTHING * f + (1 - SMOOTHING) * best_f
        cands = _descend(probe, dims, partitions, problem.restarts, rng, warm, CUT_SWEEPS)
        v = cands[0].value
        if v < -eps:
            vecs = np.array([c.assembled for c in cands])
            low = float(_expectations(best_w, vecs).min())
            if low < 0:
                # best_w was feasible only on the products seen before
                best_w, best_f = _shift(best_w, low, d), (best_f - low) / (1 - low * d)
            g = (fp - v) / (1 - v * d)
            if g < best_f:
                best_w, best_f = _shift(probe, v, d), g
            # only products that also cut the LP iterate make progress
            at_w = _expectations(w, vecs)
            cands = [replace(c, value=float(a)) for c, a in zip(cands, at_w) if a < -eps]
            cands.sort(key=lambda c: c.value)
        else:
            g = fp if v >= 0 else (fp - v) / (1 - v * d)
            if g < best_f:
                best_w, best_f = (probe if v >= 0 else _shift(probe, v, d)), g
            cands = []
        if not cands:
            cands = _descend(w, dims, partitions, problem.restarts, rng, warm, CUT_SWEEPS)
            v = cands[0].value
            if v >= -eps:
                final = w if v >= 0 else _shift(w, v, d)
            else:
                g = (f - v) / (1 - v * d)
                if g < best_f:
                    best_w, best_f = _shift(w, v, d), g
        log.debug("lp %.9f best %.9f violation %.3e cuts %d", bound_f, best_f, v, cuts)
        # the LP bound caps E_W at max(0, -bound_f); best_w attains max(0, -best_f)
        if final is None and max(0.0, -bound_f) - max(0.0, -best_f) <= problem.eps_objective:
            final = best_w

        if final is not None:
            audit = _audit(final, dims, scheme, problem, rng)
            if audit[0].value >= -eps:
                if audit[0].value < 0:
                    final = _shift(final, audit[0].value, d)
                return _result(final, rho, True, cuts, audit[0], history)
            # the certified witness failed a fresh check: repair it and keep cutting
            log.debug("audit found violation %.3e", audit[0].value)
            fixed = _shift(final, audit[0].value, d)
            g = float(np.real(np.sum(fixed.T * rho.matrix)))
            if final is best_w or g < best_f:
                best_w, best_f = fixed, g
            cands = audit + cands
            final = None

        new = _fresh_cuts([c for c in cands if c.value < -eps], limit=MAX_NEW_CUTS)
        lp.add_rows(cut_rows(new), np.full(len(new), 1 / d))
        cuts += len(new)
        warm = [c.vector for c in cands[:5] if c.value < -eps]
        if cuts >= problem.max_cuts:
            log.warning("max_cuts=%d reached without convergence", problem.max_cuts)
            last = best_w
            cert = _descend(last, dims, partitions, problem.restarts, rng)[0]
            return _result(last, rho, False, cuts, cert, history)


def _fresh_cuts(
    cands: list[Candidate], overlap: float = CUT_OVERLAP, limit: int | None = None
) -> np.ndarray:
    """Assembled vectors of candidates in order, dropping any whose fidelity
    with an already kept vector reaches ``overlap``."""
    kept: list[np.ndarray] = []
    for c in cands:
        v = c.assembled
        if all(abs(np.vdot(k, v)) ** 2 < overlap for k in kept):
            kept.append(v)
            if limit is not None and len(kept) == limit:
                break
    return np.array(kept)


def _audit(w, dims, scheme, problem, rng) -> list[Candidate]:
    """Fresh oracle restarts plus a polished random-sampling minimum."""
    found = _descend(w, dims, scheme.coarsest(), problem.restarts, rng, (), AUDIT_SWEEPS, AUDIT_TOL)
    if problem.audit_samples > 0:
        _, pv = sample_minimum(w, dims, scheme, problem.audit_samples, rng)
        found += _descend(w, dims, [pv.partition], 1, rng, [pv], AUDIT_SWEEPS, AUDIT_TOL)
        found.sort(key=lambda c: c.value)
    return found


def _result(w, rho, converged, cuts, cert: Candidate, history) -> WitnessResult:
    witness = Witness.normalized(w, rho.dims)
    val = float(np.real(np.sum(witness.matrix.T * rho.matrix)))
    return WitnessResult(
        witness=witness,
        e_w=max(0.0, -val),
        converged=converged,
        cuts_used=cuts,
        certificate=cert.vector,
        certificate_value=cert.vector.expectation(witness.matrix),
        objective_history=history,
    )


def e_w(rho: DensityOperator, scheme: PartitionScheme | None = None, **config) -> float:
    """Witnessed entanglement of ``rho``; ``config`` fills :class:`WitnessProblem`."""
    if scheme is None:
        scheme = PartitionScheme.m_separable(rho.n, 1)
    return solve(WitnessProblem(rho, scheme, **config)).e_w
