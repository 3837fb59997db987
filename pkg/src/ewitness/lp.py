"""Dense dual simplex for box-bounded LPs that grow by rows.

Solves ``min c.x  s.t.  G x <= h,  -bound <= x <= bound`` with ``x`` free
otherwise. The basis is a set of ``n`` tight rows; the box rows give a
dual-feasible start, and after rows are appended the previous basis stays
dual feasible, so re-optimizing after a few new cuts costs a few pivots.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import linprog

from .errors import NumericalBreakdownError

log = logging.getLogger(__name__)


class DenseDualSimplex:
    """Box-bounded LP re-optimized in place as rows arrive.

    Parameters
    ----------
    c : ndarray
        Objective.
    bound : float
        Box half-width for every variable.
    tol : float
        Primal feasibility tolerance of the pivoting.
    perturb : float
        Relative size of a fixed pseudo-random cost perturbation. Cut sets
        that touch a curved feasible set are massively dual degenerate and
        stall pivoting; perturbing ``c`` breaks the ties. The returned ``x``
        is then optimal for the perturbed cost, and ``lower_bound`` stays a
        valid bound on the unperturbed optimum.
    """

    def __init__(self, c: np.ndarray, bound: float, tol: float = 1e-10, perturb: float = 0.0):
        c = np.asarray(c, dtype=float)
        n = c.size
        self.n = n
        self.c = c
        u = np.random.default_rng(0).uniform(0.5, 1.0, n)
        self.delta = perturb * (1.0 + np.abs(c)) * u
        self._cp = c + self.delta
        # perturbation alone gives box multipliers of about its own size
        self._active_tol = 1e-12 if perturb == 0 else max(1e-8, 100 * perturb)
        self.tol = tol
        self._G = np.zeros((max(4 * n, 64), n))
        self._h = np.zeros(len(self._G))
        self._G[:n] = np.eye(n)
        self._G[n : 2 * n] = -np.eye(n)
        self.rows = 2 * n
        self.set_bound(bound)
        self._reset_basis()
        self.x = np.zeros(n)
        self.duals = np.zeros(n)
        self.box_active = False
        self.pivots = 0
        self.stalled = False
        self.lower_bound = -np.inf

    def _reset_basis(self):
        # x_i at +bound when c_i < 0, else at -bound: multipliers |c_i| >= 0
        idx = np.arange(self.n)
        self.basis = np.where(self._cp < 0, idx, self.n + idx)

    @property
    def G(self) -> np.ndarray:
        return self._G[: self.rows]

    @property
    def h(self) -> np.ndarray:
        return self._h[: self.rows]

    def set_bound(self, bound: float):
        self.bound = float(bound)
        self._h[: 2 * self.n] = self.bound

    def add_rows(self, G: np.ndarray, h: np.ndarray):
        G = np.atleast_2d(np.asarray(G, dtype=float))
        h = np.atleast_1d(np.asarray(h, dtype=float))
        need = self.rows + len(G)
        if need > len(self._G):
            cap = max(need, 2 * len(self._G))
            self._G = np.vstack([self._G, np.zeros((cap - len(self._G), self.n))])
            self._h = np.concatenate([self._h, np.zeros(cap - len(self._h))])
        self._G[self.rows : need] = G
        self._h[self.rows : need] = h
        self.rows = need

    def solve(self, max_pivots: int | None = None) -> np.ndarray:
        """Re-optimize from the current basis and return ``x``."""
        if max_pivots is None:
            # degenerate cut sets can stall pivoting; HiGHS is cheaper past
            # this, and after one stall the next re-solve usually stalls too
            max_pivots = self.n if self.stalled else 5 * self.n + 500
        G, h, c = self.G, self.h, self._cp
        for _ in range(max_pivots):
            try:
                lu = lu_factor(G[self.basis], check_finite=False)
            except (ValueError, np.linalg.LinAlgError):
                break
            x = lu_solve(lu, h[self.basis], check_finite=False)
            lam = lu_solve(lu, -c, trans=1, check_finite=False)
            viol = G @ x - h
            viol[self.basis] = 0.0
            r = int(np.argmax(viol))
            if viol[r] <= self.tol * (1.0 + abs(h[r])):
                self.x, self.duals = x, lam
                self.stalled = False
                self.box_active = bool(np.any(lam[self.basis < 2 * self.n] > self._active_tol))
                self.lower_bound = self._lower_bound(lu_solve(lu, -self.c, trans=1, check_finite=False))
                return x
            u = lu_solve(lu, G[r], trans=1, check_finite=False)
            pos = u > 1e-12
            if not pos.any():
                raise NumericalBreakdownError("LP became infeasible")
            ratios = np.full(self.n, np.inf)
            ratios[pos] = np.maximum(lam[pos], 0.0) / u[pos]
            best = ratios.min()
            # among near-ties prefer the largest pivot element
            ties = np.flatnonzero(ratios <= best + 1e-12)
            k = int(ties[np.argmax(u[ties])])
            self.basis[k] = r
            self.pivots += 1
        log.info("dual simplex stalled after %d pivots; falling back to HiGHS", max_pivots)
        self.stalled = True
        return self._fallback()

    def _fallback(self) -> np.ndarray:
        n = self.n
        # interior point (with crossover) copes with the heavy degeneracy of
        # large cut sets, where HiGHS' own dual simplex can stall for minutes
        for method in ("highs-ipm", "highs-ds"):
            res = linprog(
                self._cp,
                A_ub=self.G[2 * n :],
                b_ub=self.h[2 * n :],
                bounds=[(-self.bound, self.bound)] * n,
                method=method,
            )
            if res.status == 0:
                break
        if res.status != 0:
            raise NumericalBreakdownError(f"LP fallback failed: {res.message}")
        self.x = res.x
        lam = np.concatenate([-res.upper.marginals, res.lower.marginals, -res.ineqlin.marginals])
        if self._basis_from(np.maximum(lam, 0.0)):
            self.lower_bound = self._lower_bound(np.linalg.solve(self.G[self.basis].T, -self.c))
        else:
            self.lower_bound = float(res.fun - self.bound * np.abs(self.delta).sum())
        self.box_active = bool(np.any(lam[: 2 * n] > self._active_tol))
        return self.x

    def _lower_bound(self, lam: np.ndarray) -> float:
        """Lagrangian bound on the unperturbed optimum from basis multipliers.

        With ``lam+ = max(lam, 0)`` and ``r = c + G_B^T lam+``, every feasible
        ``y`` has ``c.y >= -lam+.h_B - bound |r|_1``; tight when ``lam >= 0``.
        """
        pos = np.maximum(lam, 0.0)
        r = self.c + self.G[self.basis].T @ pos
        return float(-pos @ self.h[self.basis] - self.bound * np.abs(r).sum())

    def _basis_from(self, lam: np.ndarray) -> bool:
        """Warm basis for the next re-solve from an optimal ``x`` and multipliers.

        Rows with positive multipliers come first, then other tight rows,
        kept while linearly independent. Falls back to the box basis, and
        returns False, if no dual-feasible basis results.
        """
        n, G, h = self.n, self.G, self.h
        slack = h - G @ self.x
        tight = np.flatnonzero(slack <= 1e-9 * (1.0 + np.abs(h)))
        support = tight[lam[tight] > 1e-12]
        order = np.concatenate([support[np.argsort(-lam[support], kind="stable")], np.setdiff1d(tight, support)])
        q = np.zeros((n, n))
        chosen: list[int] = []
        for r in order:
            v = G[r] - q[: len(chosen)].T @ (q[: len(chosen)] @ G[r])
            norm = np.linalg.norm(v)
            if norm > 1e-8 * np.linalg.norm(G[r]):
                q[len(chosen)] = v / norm
                chosen.append(int(r))
                if len(chosen) == n:
                    break
        self._reset_basis()
        self.duals = np.zeros(n)
        if len(chosen) < n:
            return False
        basis = np.array(chosen)
        try:
            duals = np.linalg.solve(G[basis].T, -self._cp)
        except np.linalg.LinAlgError:
            return False
        # HiGHS multipliers are accurate to its 1e-7 dual tolerance only
        if duals.min() < -1e-7:
            return False
        self.basis, self.duals = basis, duals
        return True
