import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ewitness.errors import DimensionError, NotHermitianError, OversizedProblemError
from ewitness.linalg import (
    hermitian_eigensystem,
    partial_trace,
    partial_transpose,
    schmidt_decompose,
    tensor_product,
)

from conftest import random_hermitian

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)


def kron_by_index(a, b):
    # entry (i*db + k, j*db + l) = a_ij b_kl
    (ra, ca), (rb, cb) = a.shape, b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i, j, k, l in itertools.product(range(ra), range(ca), range(rb), range(cb)):
        out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def partial_trace_by_loops(m, dims, keep):
    """Sum over traced-out multi-indices one entry at a time."""
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    kd = [dims[i] for i in keep]
    out = np.zeros((int(np.prod(kd)),) * 2, dtype=complex)
    t = m.reshape(tuple(dims) * 2)
    for row in itertools.product(*[range(d) for d in kd]):
        for col in itertools.product(*[range(d) for d in kd]):
            for env in itertools.product(*[range(dims[i]) for i in traced]):
                ri, ci = [0] * n, [0] * n
                for pos, p in enumerate(keep):
                    ri[p], ci[p] = row[pos], col[pos]
                for pos, p in enumerate(traced):
                    ri[p] = ci[p] = env[pos]
                out[np.ravel_multi_index(row, kd), np.ravel_multi_index(col, kd)] += t[tuple(ri + ci)]
    return out


class TestTensorProduct:
    def test_identities(self):
        assert np.array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_projector_position(self):
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        expected = np.zeros((4, 4))
        expected[1, 1] = 1
        assert np.array_equal(tensor_product(p0, p1), expected)

    def test_pauli_table(self):
        # X (x) Y written out by hand
        table = np.array(
            [[0, 0, 0, -1j], [0, 0, 1j, 0], [0, -1j, 0, 0], [1j, 0, 0, 0]]
        )
        assert np.array_equal(tensor_product(X, Y), table)

    def test_matches_index_oracle(self, rng):
        a = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        b = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        assert np.allclose(tensor_product(a, b), kron_by_index(a, b), atol=0)

    def test_oversized(self):
        with pytest.raises(OversizedProblemError):
            tensor_product(np.eye(64), np.eye(65))


class TestPartialTrace:
    def test_product_state(self, rng):
        ra = np.diag([0.7, 0.3])
        rb = np.diag([0.2, 0.5, 0.3])
        assert np.allclose(partial_trace(np.kron(ra, rb), (2, 3), [0]), ra, atol=1e-15)
        assert np.allclose(partial_trace(np.kron(ra, rb), (2, 3), [1]), rb, atol=1e-15)

    def test_bell_marginal(self):
        assert np.allclose(partial_trace(np.outer(BELL, BELL), (2, 2), [0]), np.eye(2) / 2)

    @pytest.mark.parametrize(
        "dims,keep", [((2, 3), [1]), ((2, 2, 2), [0, 2]), ((3, 2, 2), [1]), ((2, 3, 2), [2, 0])]
    )
    def test_matches_loop_oracle(self, rng, dims, keep):
        m = random_hermitian(rng, int(np.prod(dims)))
        got = partial_trace(m, dims, keep)
        assert np.allclose(got, partial_trace_by_loops(m, dims, sorted(keep)), atol=1e-12)

    def test_preserves_trace(self, rng):
        m = random_hermitian(rng, 12)
        assert np.isclose(np.trace(partial_trace(m, (2, 3, 2), [1])), np.trace(m))

    def test_adjoint_of_identity_extension(self, rng):
        # 100 random pairs: Tr(Tr_B(X) Y) = Tr(X (Y (x) I_B))
        worst = 0.0
        for _ in range(100):
            x, y = random_hermitian(rng, 6), random_hermitian(rng, 2)
            lhs = np.trace(partial_trace(x, (2, 3), [0]) @ y)
            rhs = np.trace(x @ np.kron(y, np.eye(3)))
            worst = max(worst, abs(lhs - rhs))
        assert worst <= 1e-8

    @pytest.mark.parametrize("keep", [[], [2], [0, 0]])
    def test_bad_indices(self, keep):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4), (2, 2), keep)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(5), (2, 2), [0])


class TestPartialTranspose:
    def test_hand_table(self):
        rho = np.arange(16).reshape(4, 4)
        first = np.array([[0, 1, 8, 9], [4, 5, 12, 13], [2, 3, 10, 11], [6, 7, 14, 15]])
        second = np.array([[0, 4, 2, 6], [1, 5, 3, 7], [8, 12, 10, 14], [9, 13, 11, 15]])
        assert np.array_equal(partial_transpose(rho, (2, 2), [0]), first)
        assert np.array_equal(partial_transpose(rho, (2, 2), [1]), second)

    def test_bell_spectrum(self):
        lam = np.linalg.eigvalsh(partial_transpose(np.outer(BELL, BELL), (2, 2), [0]))
        assert np.allclose(lam, [-0.5, 0.5, 0.5, 0.5], atol=1e-14)

    def test_all_parties_is_transpose(self, rng):
        m = random_hermitian(rng, 12)
        assert np.array_equal(partial_transpose(m, (2, 3, 2), [0, 1, 2]), m.T)

    def test_trace_duality(self, rng):
        for _ in range(20):
            x, y = random_hermitian(rng, 6), random_hermitian(rng, 6)
            lhs = np.trace(x @ partial_transpose(y, (2, 3), [0]))
            rhs = np.trace(partial_transpose(x, (2, 3), [0]) @ y)
            assert abs(lhs - rhs) <= 1e-10

    def test_out_of_range(self):
        with pytest.raises(DimensionError):
            partial_transpose(np.eye(4), (2, 2), [3])


@settings(max_examples=50, deadline=None)
@given(
    dims=st.lists(st.integers(2, 3), min_size=1, max_size=3),
    data=st.data(),
)
def test_partial_transpose_involution(dims, data):
    n = len(dims)
    sub = data.draw(st.lists(st.integers(0, n - 1), unique=True))
    seed = data.draw(st.integers(0, 2**32 - 1))
    m = random_hermitian(np.random.default_rng(seed), int(np.prod(dims)))
    once = partial_transpose(m, dims, sub)
    assert np.array_equal(partial_transpose(once, dims, sub), m)
    assert np.allclose(once, once.conj().T, atol=1e-15)
    assert np.isclose(np.trace(once), np.trace(m))


class TestEigensystem:
    def test_diagonal(self):
        lam, _ = hermitian_eigensystem(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(lam, [1, 2, 3])

    def test_pauli_x(self):
        lam, v = hermitian_eigensystem(X)
        assert np.allclose(lam, [-1, 1])
        # eigenvectors up to phase
        assert np.isclose(abs(np.vdot(v[:, 0], [1, -1])) / np.sqrt(2), 1)
        assert np.isclose(abs(np.vdot(v[:, 1], [1, 1])) / np.sqrt(2), 1)

    @pytest.mark.parametrize("d", [2, 7, 16, 64])
    def test_reconstruction(self, rng, d):
        h = random_hermitian(rng, d)
        lam, v = hermitian_eigensystem(h)
        assert np.all(np.diff(lam) >= 0)
        assert np.abs((v * lam) @ v.conj().T - h).max() <= 1e-8
        assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-8
        assert np.linalg.norm(h @ v - v * lam, axis=0).max() <= 1e-8

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            hermitian_eigensystem(np.array([[0, 1], [0, 0]], dtype=complex))


class TestSchmidt:
    def test_product(self):
        sd = schmidt_decompose(np.array([1, 0, 0, 0]), (2, 2))
        assert np.allclose(sd.coefficients, [1])

    def test_bell(self):
        assert np.allclose(schmidt_decompose(BELL, (2, 2)).coefficients, [2**-0.5] * 2)

    def test_unbalanced(self):
        psi = np.sqrt([0.8, 0, 0, 0.2])
        assert np.allclose(schmidt_decompose(psi, (2, 2)).coefficients, np.sqrt([0.8, 0.2]))

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            schmidt_decompose(np.array([1.0, 1.0, 0, 0]), (2, 2))

    def test_rejects_three_parties(self):
        with pytest.raises(DimensionError):
            schmidt_decompose(np.eye(8)[0], (2, 2, 2))


@settings(max_examples=60, deadline=None)
@given(da=st.integers(2, 4), db=st.integers(2, 4), seed=st.integers(0, 2**32 - 1))
def test_schmidt_invariants(da, db, seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(da * db) + 1j * rng.standard_normal(da * db)
    psi /= np.linalg.norm(psi)
    sd = schmidt_decompose(psi, (da, db))
    assert abs(np.sum(sd.coefficients**2) - 1) <= 1e-10
    assert np.all(np.diff(sd.coefficients) <= 0)
    assert np.linalg.norm(sd.reconstruct() - psi) <= 1e-10
    swapped = psi.reshape(da, db).T.reshape(-1)
    assert np.allclose(schmidt_decompose(swapped, (db, da)).coefficients, sd.coefficients, atol=1e-12)
