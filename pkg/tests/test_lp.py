import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from ewitness.errors import NumericalBreakdownError
from ewitness.lp import DenseDualSimplex


def highs(c, G, h, bound):
    res = linprog(c, A_ub=G, b_ub=h, bounds=[(-bound, bound)] * len(c), method="highs")
    assert res.status == 0
    return res.fun


def random_lp(rng, n, m):
    # x = 0 is strictly feasible, so the LP is always feasible
    c = rng.standard_normal(n)
    G = rng.standard_normal((m, n))
    h = rng.uniform(0.1, 1.0, m)
    return c, G, h


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12), m=st.integers(0, 40))
def test_matches_highs(seed, n, m):
    rng = np.random.default_rng(seed)
    c, G, h = random_lp(rng, n, m)
    lp = DenseDualSimplex(c, 3.0)
    if m:
        lp.add_rows(G, h)
    x = lp.solve()
    assert np.all(G @ x <= h + 1e-8)
    assert np.all(np.abs(x) <= 3.0 + 1e-9)
    assert c @ x == pytest.approx(highs(c, G if m else None, h if m else None, 3.0), abs=1e-7)


def test_warm_resolve_after_new_rows(rng):
    c, G, h = random_lp(rng, 10, 60)
    lp = DenseDualSimplex(c, 5.0)
    lp.add_rows(G[:20], h[:20])
    lp.solve()
    for k in range(20, 60, 5):
        lp.add_rows(G[k : k + 5], h[k : k + 5])
        x = lp.solve()
        assert c @ x == pytest.approx(highs(c, G[: k + 5], h[: k + 5], 5.0), abs=1e-7)
    assert lp.rows == 20 + 60


def test_box_activity_and_bound_change():
    # min -x subject to x <= 2: with bound 1 the box binds, with bound 4 it does not
    lp = DenseDualSimplex(np.array([-1.0]), 1.0)
    lp.add_rows(np.array([[1.0]]), np.array([2.0]))
    assert lp.solve()[0] == pytest.approx(1.0)
    assert lp.box_active
    lp.set_bound(4.0)
    assert lp.solve()[0] == pytest.approx(2.0)
    assert not lp.box_active


def test_duals_certify_optimality(rng):
    c, G, h = random_lp(rng, 6, 25)
    lp = DenseDualSimplex(c, 2.0)
    lp.add_rows(G, h)
    lp.solve()
    assert np.all(lp.duals >= -1e-10)
    # stationarity: G_B^T lam = -c
    assert np.allclose(lp.G[lp.basis].T @ lp.duals, -c, atol=1e-9)


def test_fallback_agrees(rng):
    c, G, h = random_lp(rng, 8, 30)
    lp = DenseDualSimplex(c, 2.0)
    lp.add_rows(G, h)
    x = lp.solve(max_pivots=0)
    assert c @ x == pytest.approx(highs(c, G, h, 2.0), abs=1e-7)


def test_infeasible_rows_raise():
    lp = DenseDualSimplex(np.array([1.0]), 1.0)
    lp.add_rows(np.array([[1.0], [-1.0]]), np.array([-0.5, -0.5]))
    with pytest.raises(NumericalBreakdownError):
        lp.solve()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10), m=st.integers(1, 40))
def test_perturbed_cost_brackets_optimum(seed, n, m):
    rng = np.random.default_rng(seed)
    c, G, h = random_lp(rng, n, m)
    lp = DenseDualSimplex(c, 3.0, perturb=1e-6)
    lp.add_rows(G, h)
    x = lp.solve()
    best = highs(c, G, h, 3.0)
    assert np.all(G @ x <= h + 1e-8)
    assert lp.lower_bound <= best + 1e-9
    assert c @ x >= best - 1e-9
    # both sides within the perturbation's reach
    assert c @ x - lp.lower_bound <= 2 * 3.0 * np.abs(lp.delta).sum() + 1e-9


def test_warm_basis_after_fallback(rng):
    c, G, h = random_lp(rng, 8, 60)
    lp = DenseDualSimplex(c, 2.0)
    lp.add_rows(G[:50], h[:50])
    lp.solve(max_pivots=0)
    assert lp.stalled
    before = lp.pivots
    lp.solve()
    # the basis recovered from HiGHS is already optimal
    assert lp.pivots == before
    assert not lp.stalled
    lp.add_rows(G[50:], h[50:])
    x = lp.solve()
    assert c @ x == pytest.approx(highs(c, G, h, 2.0), abs=1e-7)
    assert lp.lower_bound == pytest.approx(c @ x, abs=1e-9)
