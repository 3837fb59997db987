"""Quick invariant checks across every module, runnable from the CLI."""

from __future__ import annotations

import io as _io
import os
import tempfile
import time
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Callable

import numpy as np

from . import io, linalg, states
from .measures import full_report, pure_state_e_w
from .partitions import PartitionScheme, enumerate_partitions
from .solver import hermitian_basis, solve, violation_oracle, WitnessProblem
from .witness import (
    DecomposableWitness,
    Witness,
    e_dw,
    evaluate,
    is_witness_sampled,
    negativity,
    optimal_decomposable_witness,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


class _Context:
    def __init__(self, quick: bool, partial_transpose: Callable, seed: int):
        self.n = 10 if quick else 100
        self.pt = partial_transpose
        self.rng = np.random.default_rng(seed)

    def hermitian(self, d: int) -> np.ndarray:
        a = self.rng.standard_normal((d, d)) + 1j * self.rng.standard_normal((d, d))
        return (a + a.conj().T) / 2

    def state(self, dims) -> states.DensityOperator:
        return states.random_density_matrix(dims, self.rng)


def _pt_involution(ctx):
    worst = 0.0
    for dims in [(2, 2), (2, 3), (2, 2, 2)]:
        for k in range(1, len(dims) + 1):
            for sub in combinations(range(len(dims)), k):
                x = ctx.hermitian(int(np.prod(dims)))
                back = ctx.pt(ctx.pt(x, dims, sub), dims, sub)
                worst = max(worst, np.abs(back - x).max())
    return worst < 1e-14, f"max deviation {worst:.2e}"


def _pt_bell_spectrum(ctx):
    lam = np.linalg.eigvalsh(ctx.pt(states.bell_state().matrix, (2, 2), (0,)))
    ok = np.allclose(lam, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)
    return ok, f"spectrum {np.round(lam, 12).tolist()}"


def _pt_trace_identity(ctx):
    worst = 0.0
    for _ in range(ctx.n):
        x, y = ctx.hermitian(6), ctx.hermitian(6)
        lhs = np.trace(x @ ctx.pt(y, (2, 3), (0,)))
        rhs = np.trace(ctx.pt(x, (2, 3), (0,)) @ y)
        worst = max(worst, abs(lhs - rhs))
    return worst < 1e-10, f"max deviation {worst:.2e}"


def _partial_trace_adjoint(ctx):
    worst = 0.0
    for _ in range(ctx.n):
        x, y = ctx.hermitian(6), ctx.hermitian(2)
        lhs = np.trace(linalg.partial_trace(x, (2, 3), [0]) @ y)
        rhs = np.trace(x @ np.kron(y, np.eye(3)))
        worst = max(worst, abs(lhs - rhs))
    return worst < 1e-8, f"max deviation {worst:.2e}"


def _eigen_reconstruction(ctx):
    worst = 0.0
    for d in (2, 5, 16):
        h = ctx.hermitian(d)
        lam, v = linalg.hermitian_eigensystem(h)
        worst = max(worst, np.abs((v * lam) @ v.conj().T - h).max())
    return worst < 1e-8, f"max deviation {worst:.2e}"


def _schmidt(ctx):
    worst = 0.0
    for _ in range(ctx.n):
        psi = states.random_pure_state((2, 3), ctx.rng)
        sd = linalg.schmidt_decompose(psi, (2, 3))
        swapped = psi.reshape(2, 3).T.reshape(-1)
        other = linalg.schmidt_decompose(swapped, (3, 2)).coefficients
        worst = max(
            worst,
            abs(np.sum(sd.coefficients**2) - 1),
            np.linalg.norm(sd.reconstruct() - psi),
            np.abs(sd.coefficients - other).max(),
        )
    return worst < 1e-10, f"max deviation {worst:.2e}"


def _builtins_valid(ctx):
    made = [states.bell_state(), states.ghz_state(), states.w_state()]
    made += [states.wghz_mixture(p) for p in np.linspace(0, 1, 5)]
    made += [states.werner_state(p) for p in np.linspace(0, 1, 5)]
    return len(made) == 13, f"{len(made)} builtin states validated"


def _wghz_symmetry(ctx):
    worst = 0.0
    for p in np.linspace(0, 1, 5):
        t = states.wghz_mixture(p).matrix.reshape((2,) * 6)
        for perm in permutations(range(3)):
            q = t.transpose(*perm, *(3 + i for i in perm)).reshape(8, 8)
            worst = max(worst, np.abs(q - t.reshape(8, 8)).max())
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _edw_consistency(ctx):
    worst = 0.0
    for _ in range(ctx.n):
        rho = ctx.state((2, 3))
        w, _ = optimal_decomposable_witness(rho, (0,))
        worst = max(worst, abs(e_dw(rho, (0,)) + min(0.0, evaluate(w, rho))))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _edw_local_unitary(ctx):
    worst = 0.0
    for _ in range(ctx.n):
        rho = ctx.state((2, 3))
        u = states.random_local_unitary((2, 3), ctx.rng)
        worst = max(worst, abs(e_dw(states.conjugate(rho, u), (0,)) - e_dw(rho, (0,))))
    return worst < 1e-9, f"max deviation {worst:.2e}"


def _edw_convexity(ctx):
    worst = -np.inf
    for _ in range(ctx.n):
        a, b = ctx.state((2, 2)), ctx.state((2, 2))
        lam = ctx.rng.uniform()
        mixed = e_dw(states.mix(a, b, lam), (0,))
        worst = max(worst, mixed - lam * e_dw(a, (0,)) - (1 - lam) * e_dw(b, (0,)))
    return worst <= 1e-9, f"largest excess {worst:.2e}"


def _negativity_two_qubit(ctx):
    worst = 0.0
    for _ in range(ctx.n):
        rho = ctx.state((2, 2))
        worst = max(worst, abs(negativity(rho, (0,)) - e_dw(rho, (0,))))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def _decomposable_nonnegative(ctx):
    p_op = ctx.state((2, 2)).matrix
    q_op = ctx.state((2, 2)).matrix
    w = DecomposableWitness(0.3, p_op, q_op, (0,), (2, 2)).to_witness()
    scheme = PartitionScheme.m_separable(2)
    low, bad = is_witness_sampled(w, scheme, 1000 if ctx.n < 100 else 10_000, ctx.rng)
    return bad is None, f"sampled minimum {low:.3e}"


def _basis_orthonormal(ctx):
    worst = 0.0
    for d in (2, 3, 4):
        b = hermitian_basis(d)
        gram = np.einsum("aij,bji->ab", b, b)
        worst = max(worst, np.abs(gram - np.eye(d * d)).max())
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _partition_counts(ctx):
    counts = (len(enumerate_partitions(3, 1)), len(enumerate_partitions(3, 2)), len(enumerate_partitions(4, 2)))
    return counts == (1, 4, 10), f"counts {counts}"


def _oracle_identity(ctx):
    w = Witness(np.eye(4) / 4, (2, 2))
    val, _ = violation_oracle(w, PartitionScheme.m_separable(2), restarts=3, seed=0)
    return abs(val - 0.25) < 1e-12, f"value {val!r}"


def _solver_bell(ctx):
    res = solve(WitnessProblem(states.bell_state(), PartitionScheme.m_separable(2)))
    return res.converged and abs(res.e_w - 0.5) <= 1e-3, f"e_w {res.e_w:.6f}"


def _solver_separable(ctx):
    rho = states.random_separable_state((2, 2), ctx.rng)
    res = solve(WitnessProblem(rho, PartitionScheme.m_separable(2)))
    return res.converged and res.e_w <= 1e-6, f"e_w {res.e_w:.2e}"


def _pure_formula(ctx):
    vals = (
        pure_state_e_w(np.array([1, 0, 0, 0]), (2, 2)),
        pure_state_e_w(states.bell_vector(), (2, 2)),
        pure_state_e_w(np.sqrt([0.8, 0, 0, 0.2]), (2, 2)),
    )
    ok = np.allclose(vals, [0, 0.5, 0.4], atol=1e-12)
    return ok, f"values {[round(v, 12) for v in vals]}"


def _werner_report(ctx):
    rep = full_report(states.werner_state(0.6), which=["e_dw", "negativity"])
    ok = abs(rep.e_dw - 0.2) < 1e-12 and abs(rep.negativity - 0.2) < 1e-12
    return ok, f"e_dw {rep.e_dw!r}, negativity {rep.negativity!r}"


def _state_file_roundtrip(ctx):
    rho = ctx.state((2, 3))
    fd, path = tempfile.mkstemp(suffix=".json")
    os.close(fd)
    try:
        io.write_state(path, rho, "roundtrip")
        back = io.read_state(path)
    finally:
        os.remove(path)
    same = bool(np.array_equal(back.matrix, rho.matrix))
    return same, "bit-exact" if same else "entries differ"


CHECKS: list[tuple[str, str, Callable]] = [
    ("tensor-linalg", "partial transpose involution", _pt_involution),
    ("tensor-linalg", "Bell partial transpose spectrum", _pt_bell_spectrum),
    ("tensor-linalg", "partial transpose trace identity", _pt_trace_identity),
    ("tensor-linalg", "partial trace adjointness", _partial_trace_adjoint),
    ("tensor-linalg", "eigen reconstruction", _eigen_reconstruction),
    ("tensor-linalg", "Schmidt normalization and swap", _schmidt),
    ("state-zoo", "builtins validate", _builtins_valid),
    ("state-zoo", "wghz permutation symmetry", _wghz_symmetry),
    ("witness-core", "e_dw matches its witness", _edw_consistency),
    ("witness-core", "e_dw local-unitary invariance", _edw_local_unitary),
    ("witness-core", "e_dw convexity", _edw_convexity),
    ("witness-core", "two-qubit negativity equals e_dw", _negativity_two_qubit),
    ("witness-core", "decomposable witness nonnegative", _decomposable_nonnegative),
    ("oew-solver", "Hermitian basis orthonormal", _basis_orthonormal),
    ("oew-solver", "partition counts", _partition_counts),
    ("oew-solver", "oracle on identity witness", _oracle_identity),
    ("oew-solver", "Bell state e_w", _solver_bell),
    ("oew-solver", "separable state e_w", _solver_separable),
    ("measures", "pure-state formula", _pure_formula),
    ("measures", "Werner report", _werner_report),
    ("cli", "state file round trip", _state_file_roundtrip),
]


def run_selftest(
    quick: bool = False,
    partial_transpose: Callable | None = None,
    seed: int = 2024,
) -> list[CheckResult]:
    """Run every check; ``partial_transpose`` replaces the library routine."""
    ctx = _Context(quick, partial_transpose or linalg.partial_transpose, seed)
    out = []
    for module, name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(ctx)
        except Exception as exc:  # a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(f"{module}: {name}", bool(ok), detail, time.perf_counter() - t0))
    return out


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    buf = _io.StringIO()
    for r in results:
        buf.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.seconds:6.2f}s  {r.detail}\n")
    passed = sum(r.passed for r in results)
    buf.write(f"{passed}/{len(results)} checks passed\n")
    return buf.getvalue()
