import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ewitness import states
from ewitness.errors import DimensionError, NotHermitianError
from ewitness.linalg import partial_transpose
from ewitness.partitions import PartitionScheme
from ewitness.witness import (
    DecomposableWitness,
    Witness,
    e_dw,
    evaluate,
    is_witness_sampled,
    negativity,
    optimal_decomposable_witness,
)

PAIR = PartitionScheme.m_separable(2)


def trace_norm_negativity(rho, cut):
    """(||rho^T_A||_1 - 1) / 2 via singular values."""
    s = np.linalg.svd(partial_transpose(rho.matrix, rho.dims, cut), compute_uv=False)
    return (s.sum() - 1) / 2


class TestWitnessType:
    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError):
            Witness(np.eye(4) / 2, (2, 2))

    def test_rejects_non_hermitian(self):
        m = np.eye(2) / 2 + np.array([[0, 1e-6], [0, 0]])
        with pytest.raises(NotHermitianError):
            Witness(m, (2,))

    def test_normalized(self):
        w = Witness.normalized(np.diag([2.0, 2.0, 2.0, -2.0]), (2, 2))
        assert np.trace(w.matrix).real == pytest.approx(1)


class TestEvaluate:
    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (2, 2, 2)])
    def test_identity_witness(self, rng, dims):
        d = int(np.prod(dims))
        rho = states.random_density_matrix(dims, rng)
        assert evaluate(Witness(np.eye(d) / d, dims), rho) == pytest.approx(1 / d, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            evaluate(Witness(np.eye(4) / 4, (2, 2)), states.ghz_state())

    def test_product_states_nonnegative_on_decomposable(self, rng):
        w, _ = optimal_decomposable_witness(states.bell_state(), (0,))
        for _ in range(20):
            pv = states.random_product_state((2, 2), [[0], [1]], rng)
            rho = states.projector(pv.assembled, (2, 2))
            assert evaluate(w, rho) >= -1e-9


class TestOptimalDecomposable:
    def test_bell(self):
        w, detected = optimal_decomposable_witness(states.bell_state(), (0,))
        assert detected
        assert evaluate(w, states.bell_state()) == pytest.approx(-0.5, abs=1e-12)

    def test_werner_half(self):
        rho = states.werner_state(0.5)
        w, detected = optimal_decomposable_witness(rho, (0,))
        assert detected
        assert evaluate(w, rho) == pytest.approx(-1 / 8, abs=1e-12)

    def test_separable_not_detected(self):
        rho = states.projector(np.array([1, 0, 0, 0]), (2, 2))
        w, detected = optimal_decomposable_witness(rho, (0,))
        assert not detected
        assert evaluate(w, rho) >= 0

    def test_degenerate_eigenspace_uses_full_projector(self):
        # I/4 has a fourfold degenerate PT spectrum: the witness is I/4 itself
        w, _ = optimal_decomposable_witness(states.maximally_mixed((2, 2)), (0,))
        assert np.allclose(w.matrix, np.eye(4) / 4)

    def test_bad_cut(self):
        with pytest.raises(DimensionError):
            optimal_decomposable_witness(states.bell_state(), (0, 1))


class TestClosedForms:
    def test_bell(self):
        assert e_dw(states.bell_state(), (0,)) == pytest.approx(0.5, abs=1e-15)
        assert negativity(states.bell_state(), (0,)) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("p", [0, 0.1, 1 / 3 - 1e-9])
    def test_werner_below_threshold(self, p):
        assert e_dw(states.werner_state(p), (0,)) == 0.0

    @pytest.mark.parametrize("p", [0.4, 0.6, 0.95])
    def test_werner_above_threshold(self, p):
        assert e_dw(states.werner_state(p), (0,)) == pytest.approx((3 * p - 1) / 4, abs=1e-15)

    def test_maximally_mixed(self):
        assert e_dw(states.maximally_mixed((2, 3)), (0,)) == 0.0
        assert negativity(states.maximally_mixed((2, 3)), (0,)) == 0.0

    def test_separable(self, rng):
        rho = states.random_separable_state((2, 3), rng)
        assert negativity(rho, (0,)) <= 1e-12

    def test_two_qubit_negativity_equals_e_dw(self, rng):
        for _ in range(100):
            rho = states.random_density_matrix((2, 2), rng)
            assert abs(negativity(rho, (0,)) - e_dw(rho, (0,))) <= 1e-12

    def test_negativity_trace_norm_form(self, rng):
        for dims in [(2, 3), (3, 3), (2, 2, 2)]:
            rho = states.random_density_matrix(dims, rng, rank=2)
            assert negativity(rho, (0,)) == pytest.approx(trace_norm_negativity(rho, (0,)), abs=1e-12)

    def test_ghz_cut(self):
        assert e_dw(states.ghz_state(), (0,)) == pytest.approx(0.5, abs=1e-15)
        assert e_dw(states.w_state(), (0,)) == pytest.approx(np.sqrt(2) / 3, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.sampled_from([(2, 2), (2, 3), (3, 3), (2, 2, 2)]))
def test_e_dw_matches_its_witness(seed, dims):
    rho = states.random_density_matrix(dims, seed, rank=1 + seed % 3)
    w, _ = optimal_decomposable_witness(rho, (0,))
    assert abs(e_dw(rho, (0,)) + min(0.0, evaluate(w, rho))) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_e_dw_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = states.random_density_matrix((2, 3), rng, rank=2)
    u = states.random_local_unitary((2, 3), rng)
    assert abs(e_dw(states.conjugate(rho, u), (0,)) - e_dw(rho, (0,))) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lam=st.floats(0, 1))
def test_e_dw_convexity(seed, lam):
    rng = np.random.default_rng(seed)
    a = states.random_density_matrix((2, 3), rng, rank=2)
    b = states.random_density_matrix((2, 3), rng, rank=2)
    mixed = e_dw(states.mix(a, b, lam), (0,))
    assert mixed <= lam * e_dw(a, (0,)) + (1 - lam) * e_dw(b, (0,)) + 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_e_dw_continuity(seed):
    rng = np.random.default_rng(seed)
    rho = states.random_density_matrix((2, 3), rng)
    sigma = states.random_density_matrix((2, 3), rng)
    eps = 1e-3 / 2  # trace norm of eps (sigma - rho) is at most 2 eps
    moved = states.mix(sigma, rho, eps)
    assert abs(e_dw(moved, (0,)) - e_dw(rho, (0,))) <= 10 * 1e-3


class TestSampledAudit:
    def test_identity(self):
        low, bad = is_witness_sampled(Witness(np.eye(4) / 4, (2, 2)), PAIR, 1000, 0)
        assert low >= 0.25 - 1e-12
        assert bad is None

    def test_decomposable_bell_witness(self):
        w, _ = optimal_decomposable_witness(states.bell_state(), (0,))
        low, bad = is_witness_sampled(w, PAIR, 10_000, 0)
        assert bad is None and low >= -1e-9

    def test_finds_violation(self):
        # I - 3|Phi+><Phi+| has trace 1 and <00|W|00> = 1 - 3/2
        bell = states.bell_vector()
        w = Witness(np.eye(4) - 3 * np.outer(bell, bell.conj()), (2, 2))
        low, bad = is_witness_sampled(w, PAIR, 10_000, 0)
        assert bad is not None
        assert -0.5 - 1e-12 <= low < -0.4
        assert bad.expectation(w.matrix) == pytest.approx(low)

    def test_seeded(self):
        w = Witness(np.eye(8) / 8, (2, 2, 2))
        scheme = PartitionScheme.m_separable(3, 2)
        assert is_witness_sampled(w, scheme, 500, 3)[0] == is_witness_sampled(w, scheme, 500, 3)[0]

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            is_witness_sampled(Witness(np.eye(4) / 4, (2, 2)), PAIR, 0)


def test_decomposable_witness_nonnegative_on_products(rng):
    for _ in range(5):
        p_op = states.random_density_matrix((2, 3), rng, rank=2).matrix
        q_op = states.random_density_matrix((2, 3), rng, rank=1).matrix
        dw = DecomposableWitness(rng.uniform(), p_op, q_op, (0,), (2, 3))
        assert np.allclose(dw.matrix, dw.matrix.conj().T)
        low, bad = is_witness_sampled(dw.to_witness(), PartitionScheme.m_separable(2), 10_000, rng)
        assert bad is None and low >= -1e-9


def test_decomposable_witness_requires_positive_parts():
    with pytest.raises(ValueError):
        DecomposableWitness(0.5, np.diag([1.0, -0.1, 0, 0]), np.eye(4), (0,), (2, 2))
