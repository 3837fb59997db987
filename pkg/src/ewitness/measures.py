"""Witnessed entanglement alongside its closed-form companion measures."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .linalg import schmidt_decompose
from .partitions import PartitionScheme
from .solver import WitnessProblem, WitnessResult, solve
from .states import DensityOperator
from .witness import e_dw, negativity

MEASURES = ("e_w", "e_dw", "negativity", "random_robustness", "schmidt_product")
PURITY_TOL = 1e-9
CONSISTENCY_TOL = 1e-3


def random_robustness(
    rho: DensityOperator, scheme: PartitionScheme | None = None, **config
) -> float:
    """Robustness against mixing with white noise, ``D * e_w``.

    Mixing ``(rho + s I/D) / (1 + s)`` at the returned ``s`` lands on the
    boundary of the scheme's separable set.
    """
    return rho.dim * _solve(rho, scheme, config).e_w


def pure_state_e_w(psi: np.ndarray, dims: Sequence[int], cut: Iterable[int] = (0,)) -> float:
    """Witnessed entanglement of a pure state across ``cut``: ``a_1 a_2``.

    ``a_1 >= a_2`` are the two largest Schmidt coefficients; a product
    state (Schmidt rank 1) gives 0.
    """
    psi, grouped = _regroup(np.asarray(psi, dtype=complex), tuple(dims), cut)
    a = schmidt_decompose(psi, grouped).coefficients
    return float(a[0] * a[1]) if a.size > 1 else 0.0


def _regroup(psi: np.ndarray, dims: tuple[int, ...], cut: Iterable[int]):
    """Reorder ``psi`` so the ``cut`` parties come first, as a two-party vector."""
    n = len(dims)
    side = sorted({int(i) for i in cut})
    rest = [i for i in range(n) if i not in side]
    if not side or not rest or any(not 0 <= i < n for i in side):
        raise ValueError(f"cut {tuple(side)} does not split {n} parties in two")
    t = psi.reshape(dims).transpose(side + rest).reshape(-1)
    da = int(np.prod([dims[i] for i in side]))
    return t, (da, t.size // da)


def _solve(rho, scheme, config) -> WitnessResult:
    if scheme is None:
        scheme = PartitionScheme.m_separable(rho.n, 1)
    return solve(WitnessProblem(rho, scheme, **config))


@dataclass
class MeasureReport:
    """Requested measures of one state; unrequested ones stay None."""

    scheme: str
    e_w: float | None = None
    e_dw: float | None = None
    negativity: float | None = None
    random_robustness: float | None = None
    schmidt_product: float | None = None
    converged: dict[str, bool] = field(default_factory=dict)
    cuts_used: int | None = None
    timings: dict[str, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    @property
    def all_converged(self) -> bool:
        return all(self.converged.values())

    def to_dict(self, timings: bool = False) -> dict:
        out: dict = {"scheme": self.scheme}
        for name in MEASURES:
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        out["converged"] = dict(self.converged)
        if self.cuts_used is not None:
            out["cuts_used"] = self.cuts_used
        out["flags"] = list(self.flags)
        if timings:
            out["timings"] = dict(self.timings)
        return out


def full_report(
    rho: DensityOperator,
    scheme: PartitionScheme | None = None,
    config: dict | None = None,
    which: Iterable[str] = MEASURES,
) -> MeasureReport:
    """Compute the selected measures of ``rho``.

    Parameters
    ----------
    rho : DensityOperator
    scheme : PartitionScheme, optional
        Defaults to full separability. The bipartite measures (``e_dw``,
        ``negativity``, ``schmidt_product``) need a scheme with a single
        cut, which every two-party scheme has.
    config : dict, optional
        Extra :class:`WitnessProblem` fields for the solver.
    which : iterable of str
        Subset of ``MEASURES``.

    Raises
    ------
    ValueError
        On unknown measure names, a bipartite measure without a cut, or
        ``schmidt_product`` requested for a mixed state.
    """
    which = list(dict.fromkeys(which))
    unknown = set(which) - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown measures: {sorted(unknown)}")
    if scheme is None:
        scheme = PartitionScheme.m_separable(rho.n, 1)
    config = dict(config or {})
    cut = scheme.bipartite_cut()
    if cut is None and {"e_dw", "negativity", "schmidt_product"} & set(which):
        raise ValueError(f"scheme {scheme.describe()} has no single bipartition")
    if "schmidt_product" in which and rho.purity() < 1 - PURITY_TOL:
        raise ValueError(f"schmidt_product needs a pure state, purity is {rho.purity():.12g}")

    report = MeasureReport(scheme=scheme.describe())
    result = None
    for name in which:
        t0 = time.perf_counter()
        if name in ("e_w", "random_robustness"):
            if result is None:
                result = _solve(rho, scheme, config)
                report.converged["e_w"] = result.converged
                report.cuts_used = result.cuts_used
            val = result.e_w if name == "e_w" else rho.dim * result.e_w
        elif name == "e_dw":
            val = e_dw(rho, cut)
        elif name == "negativity":
            val = negativity(rho, cut)
        else:
            val = _schmidt_of_mixed(rho, cut)
        setattr(report, name, float(val))
        report.timings[name] = time.perf_counter() - t0

    if result is not None and result.converged:
        if report.e_dw is not None and report.e_w < report.e_dw - CONSISTENCY_TOL:
            report.flags.append("e_w_below_e_dw")
        if report.negativity is not None and report.e_w < report.negativity - CONSISTENCY_TOL:
            report.flags.append("e_w_below_negativity")
    if result is not None and not result.converged:
        report.flags.append("not_converged")
    return report


def _schmidt_of_mixed(rho: DensityOperator, cut) -> float:
    # rho is pure within tolerance: take its dominant eigenvector
    _, vecs = np.linalg.eigh(rho.matrix)
    return pure_state_e_w(vecs[:, -1], rho.dims, cut)
