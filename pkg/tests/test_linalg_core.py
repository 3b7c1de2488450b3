from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from phstruct.exceptions import ConditionViolation, DimensionError
from phstruct.linalg_core import (
    Tolerance,
    column_basis,
    eliminate_variables,
    left_annihilator,
    max_principal_angle,
    null_space,
    numerical_rank,
    psd_cone_check,
    psd_rank_factor,
    skew_symmetric_split,
    subspace_equal,
)

entries = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def matrices(max_dim=8):
    shape = st.tuples(st.integers(1, max_dim), st.integers(1, max_dim))
    return shape.flatmap(lambda s: arrays(np.float64, s, elements=entries))


def low_rank(seed, rows, cols, rank):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))


class TestColumnBasis:
    def test_diagonal(self):
        B = column_basis([[1, 0], [0, 0]])
        assert B.shape == (2, 1)
        assert np.allclose(np.abs(B[:, 0]), [1, 0])

    def test_zero(self):
        assert column_basis(np.zeros((2, 2))).shape == (2, 0)

    def test_rank_one(self):
        B = column_basis([[1, 1], [1, 1]])
        assert B.shape == (2, 1)
        assert np.allclose(np.abs(B[:, 0]), [1 / np.sqrt(2)] * 2)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            column_basis([[np.nan, 0], [0, 1]])

    def test_scale_floor_zeroes_tiny_block(self):
        tiny = np.array([[1e-17, 0], [0, 0]])
        assert column_basis(tiny).shape[1] == 1
        assert column_basis(tiny, scale=1.0).shape[1] == 0


class TestLeftAnnihilator:
    def test_axis(self):
        A = left_annihilator(np.array([[1.0], [0.0]]))
        assert np.allclose(np.abs(A), [[0, 1]])

    def test_full(self):
        assert left_annihilator(np.eye(2)).shape == (0, 2)

    def test_diagonal_direction(self):
        A = left_annihilator(np.array([[1.0], [1.0]]))
        assert A.shape == (1, 2)
        assert np.allclose(np.abs(A), [[1, 1]] / np.sqrt(2))
        assert A[0, 0] * A[0, 1] < 0


class TestSubspaceEqual:
    def test_same(self):
        assert subspace_equal([[1], [0]], [[1], [0]])

    def test_orthogonal(self):
        assert not subspace_equal([[1], [0]], [[0], [1]])

    def test_scaling(self):
        assert subspace_equal([[1], [1]], [[2], [2]])

    def test_ambient_mismatch(self):
        with pytest.raises(DimensionError):
            subspace_equal(np.eye(2), np.eye(3))

    def test_rank_mismatch_gives_right_angle(self):
        assert max_principal_angle(np.eye(3)[:, :1], np.eye(3)[:, :2]) == pytest.approx(np.pi / 2)

    def test_small_angle_resolved(self):
        eps = 1e-11
        assert max_principal_angle([[1], [0]], [[1], [eps]]) == pytest.approx(eps, rel=1e-3)


class TestSkewSymmetricSplit:
    def test_identity(self):
        J, Rs = skew_symmetric_split(np.eye(2))
        assert np.array_equal(J, np.zeros((2, 2)))
        assert np.array_equal(Rs, np.eye(2))

    def test_pure_skew(self):
        J, Rs = skew_symmetric_split([[0, 1], [-1, 0]])
        assert np.array_equal(Rs, np.zeros((2, 2)))
        assert np.array_equal(J, [[0, -1], [1, 0]])

    def test_mixed(self):
        J, Rs = skew_symmetric_split([[1, 1], [-1, 1]])
        assert np.array_equal(J, [[0, -1], [1, 0]])
        assert np.array_equal(Rs, np.eye(2))

    def test_non_square(self):
        with pytest.raises(DimensionError):
            skew_symmetric_split(np.ones((2, 3)))


class TestPsd:
    def test_identity(self):
        assert psd_cone_check(np.eye(2)).psd

    def test_boundary(self):
        assert psd_cone_check(np.diag([1.0, 0.0])).psd

    def test_indefinite_witness(self):
        v = psd_cone_check(np.diag([1.0, -1.0]))
        assert not v.psd
        assert np.allclose(np.abs(v.witness), [0, 1])
        assert v.witness @ np.diag([1.0, -1.0]) @ v.witness < 0

    def test_asymmetric_rejected(self):
        with pytest.raises(ConditionViolation) as info:
            psd_cone_check([[1, 1], [0, 1]])
        assert info.value.condition == "symmetry"

    def test_rank_factor_examples(self):
        G, R = psd_rank_factor(np.diag([4.0, 0.0]))
        assert np.allclose(G, [[1], [0]]) and np.allclose(R, [[4]])
        G, R = psd_rank_factor(np.zeros((2, 2)))
        assert G.shape == (2, 0) and R.shape == (0, 0)
        G, R = psd_rank_factor(np.eye(2))
        assert np.allclose(G @ R @ G.T, np.eye(2)) and G.shape == (2, 2)

    def test_rank_factor_rejects_indefinite(self):
        with pytest.raises(ConditionViolation):
            psd_rank_factor(np.diag([1.0, -1.0]))


class TestTolerance:
    def test_env_override(self):
        tol = Tolerance.from_env({"PHS_TOL_RANK": "1e-6", "PHS_TOL_SUB": ""})
        assert tol.rank == 1e-6 and tol.sub == 1e-9

    def test_positive(self):
        with pytest.raises(ValueError):
            Tolerance(rank=0.0)


@given(matrices())
def test_basis_orthonormal_and_annihilator_complement(M):
    B = column_basis(M)
    assert np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-12)
    A = left_annihilator(B)
    assert A.shape[0] + B.shape[1] == M.shape[0]
    assert np.allclose(A @ M, 0, atol=1e-9 * max(1, np.abs(M).max()))


@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 8), st.integers(0, 8))
def test_rank_of_low_rank_products(seed, rows, cols, rank):
    rank = min(rank, rows, cols)
    M = low_rank(seed, rows, cols, rank)
    assert numerical_rank(M) == rank
    assert null_space(M).shape[1] == cols - rank


@given(matrices())
def test_split_reconstructs_exactly(M):
    if M.shape[0] != M.shape[1]:
        M = M[: min(M.shape), : min(M.shape)]
    J, Rs = skew_symmetric_split(M)
    assert np.allclose(-J + Rs, M, rtol=0, atol=1e-12 * max(1, np.abs(M).max()))
    assert np.array_equal(J, -J.T)
    assert np.array_equal(Rs, Rs.T)


@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(0, 8))
def test_psd_rank_factor_properties(seed, n, rank):
    rank = min(rank, n)
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((n, rank))
    Rs = F @ F.T
    G, Rt = psd_rank_factor(Rs)
    assert G.shape[1] == rank
    assert np.all(np.linalg.eigvalsh(Rt) > 0) if rank else Rt.size == 0
    err = np.linalg.norm(G @ Rt @ G.T - Rs) / max(np.linalg.norm(Rs), 1e-300)
    assert rank == 0 or err <= 1e-10
    assert rank == 0 or subspace_equal(G, Rs)


@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(1, 3))
def test_subspace_equal_is_an_equivalence(seed, n, k):
    k = min(k, n - 1)
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, k))
    B2 = B @ rng.standard_normal((k, k))
    B3 = B2 @ rng.standard_normal((k, k))
    C = rng.standard_normal((n, k))
    assert subspace_equal(B, B)
    assert subspace_equal(B, B2) == subspace_equal(B2, B)
    assert subspace_equal(B, B2) and subspace_equal(B2, B3) and subspace_equal(B, B3)
    assert subspace_equal(B, C) == subspace_equal(C, B)


def test_eliminate_variables_projects():
    # {(a, b, c) : a = c, b = c}; eliminating c leaves a = b
    rows = np.array([[1.0, 0, -1], [0, 1, -1]])
    red = eliminate_variables(rows, [2])
    assert subspace_equal(null_space(red), [[1], [1]])
