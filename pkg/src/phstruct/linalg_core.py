"""Dense linear algebra kernels with an explicit tolerance policy.

Every rank decision in the package goes through :func:`numerical_rank`, and
every subspace comparison through :func:`max_principal_angle`, so that a
single :class:`Tolerance` value governs the whole pipeline.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .exceptions import ConditionViolation, DimensionError

__all__ = [
    "Tolerance",
    "PsdVerdict",
    "as_matrix",
    "numerical_rank",
    "column_basis",
    "left_annihilator",
    "null_space",
    "max_principal_angle",
    "subspace_equal",
    "skew_symmetric_split",
    "psd_cone_check",
    "psd_rank_factor",
    "eliminate_variables",
]

ENV_VARS = {"rank": "PHS_TOL_RANK", "psd": "PHS_TOL_PSD", "sub": "PHS_TOL_SUB"}


@dataclass(frozen=True)
class Tolerance:
    """Thresholds used for numerical decisions.

    Parameters
    ----------
    rank : float
        Relative rank threshold. A singular value counts if it exceeds
        ``rank * s_max * max(m, n)``.
    psd : float
        PSD slack. A symmetric matrix is accepted as PSD if its smallest
        eigenvalue is at least ``-psd * max(||S||_2, 1)``.
    sub : float
        Largest principal angle (radians) for two subspaces to count as equal.
        Also used as the isotropy threshold for bilinear-form residuals and
        as the symmetry threshold of :func:`psd_cone_check`.
    """

    rank: float = 1e-10
    psd: float = 1e-9
    sub: float = 1e-9

    def __post_init__(self):
        for name in ("rank", "psd", "sub"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"tolerance {name!r} must be positive, got {value!r}")

    @classmethod
    def from_env(cls, environ=None):
        """Defaults, overridden by ``PHS_TOL_RANK``, ``PHS_TOL_PSD``, ``PHS_TOL_SUB``."""
        environ = os.environ if environ is None else environ
        kwargs = {}
        for field, var in ENV_VARS.items():
            if environ.get(var):
                kwargs[field] = float(environ[var])
        return cls(**kwargs)


def resolve_tol(tol):
    return Tolerance.from_env() if tol is None else tol


def as_matrix(M, rows=None, cols=None, name="matrix"):
    """Convert to a finite 2-D float array, optionally checking its shape.

    Empty input is reshaped to the requested shape when that shape has no
    entries (e.g. a ``3 x 0`` block). A 1-D vector becomes a column unless a
    single row is requested.
    """
    A = np.asarray(M, dtype=float)
    if A.size == 0:
        shape = A.shape if A.ndim == 2 else (0, 0)
        r = shape[0] if rows is None else rows
        c = shape[1] if cols is None else cols
        if r * c != 0:
            raise DimensionError(f"{name} is empty but must be {r} x {c}")
        return np.zeros((r, c))
    if A.ndim == 1:
        A = A.reshape(1, -1) if rows == 1 else A.reshape(-1, 1)
    elif A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {A.shape}")
    if rows is not None and A.shape[0] != rows:
        raise DimensionError(f"{name} must have {rows} rows, got {A.shape[0]}")
    if cols is not None and A.shape[1] != cols:
        raise DimensionError(f"{name} must have {cols} columns, got {A.shape[1]}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def _rank_from_singular_values(s, shape, tol, scale=None):
    ref = s[0] if s.size else 0.0
    if scale is not None:
        ref = max(ref, scale)
    if s.size == 0 or ref == 0.0:
        return 0
    threshold = tol.rank * ref * max(shape)
    return int(np.count_nonzero(s > threshold))


def numerical_rank(M, tol=None, scale=None):
    """Count singular values above ``tol.rank * s_ref * max(shape)``.

    ``s_ref`` is the largest singular value, or ``scale`` if that is larger.
    Pass ``scale`` when ``M`` is a block of a bigger object (say a slice of an
    orthonormal basis), so that a numerically zero block gets rank 0.
    """
    A = as_matrix(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return _rank_from_singular_values(s, A.shape, resolve_tol(tol), scale)


def _svd(A):
    if A.size == 0:
        m, n = A.shape
        return np.eye(m), np.zeros(0), np.eye(n)
    return np.linalg.svd(A, full_matrices=True)


def column_basis(M, tol=None, scale=None):
    """Orthonormal basis of ``im M``; column count equals the numerical rank."""
    A = as_matrix(M)
    U, s, _ = _svd(A)
    k = _rank_from_singular_values(s, A.shape, resolve_tol(tol), scale)
    return U[:, :k].copy()


def left_annihilator(M, tol=None, scale=None):
    """Matrix ``A`` with orthonormal rows such that ``ker A = im M``.

    The row count is ``rows(M) - rank(M)``.
    """
    A = as_matrix(M)
    U, s, _ = _svd(A)
    k = _rank_from_singular_values(s, A.shape, resolve_tol(tol), scale)
    return U[:, k:].T.copy()


def null_space(M, tol=None, scale=None):
    """Orthonormal basis (columns) of ``ker M``."""
    A = as_matrix(M)
    return left_annihilator(A.T, tol, scale).T


def _orth(B, tol):
    return column_basis(B, tol)


def max_principal_angle(B1, B2, tol=None):
    """Largest principal angle between ``im B1`` and ``im B2``.

    Returns ``pi/2`` when the dimensions differ (the larger space has a
    direction orthogonal to the smaller one).
    """
    tol = resolve_tol(tol)
    A1, A2 = as_matrix(B1), as_matrix(B2)
    if A1.shape[0] != A2.shape[0]:
        raise DimensionError(
            f"ambient dimensions differ: {A1.shape[0]} vs {A2.shape[0]}"
        )
    Q1, Q2 = _orth(A1, tol), _orth(A2, tol)
    if Q1.shape[1] != Q2.shape[1]:
        return np.pi / 2
    if Q1.shape[1] == 0:
        return 0.0
    # sine form stays accurate for tiny angles, unlike arccos of cosines
    residual = Q2 - Q1 @ (Q1.T @ Q2)
    sin_max = np.linalg.norm(residual, 2)
    return float(np.arcsin(min(sin_max, 1.0)))


def subspace_equal(B1, B2, tol=None):
    """True iff the spans have equal rank and largest principal angle <= ``tol.sub``."""
    tol = resolve_tol(tol)
    return max_principal_angle(B1, B2, tol) <= tol.sub


def skew_symmetric_split(M):
    """Split a square ``M`` as ``M = -J + Rs`` with ``J`` skew and ``Rs`` symmetric."""
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    J = 0.5 * (A.T - A)
    Rs = 0.5 * (A + A.T)
    return J, Rs


@dataclass(frozen=True)
class PsdVerdict:
    psd: bool
    min_eig: float
    threshold: float
    witness: np.ndarray | None = None

    def __bool__(self):
        return self.psd


def _symmetrized(S, tol):
    A = as_matrix(S)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if A.size == 0:
        return A
    scale = max(np.linalg.norm(A, 2), 1.0)
    asym = np.linalg.norm(A - A.T, 2)
    if asym > tol.sub * scale:
        raise ConditionViolation(
            "symmetry",
            f"matrix is not symmetric (||S - S^T|| = {asym:.3e})",
            residual=float(asym),
        )
    return 0.5 * (A + A.T)


def psd_cone_check(Ssym, tol=None, scale=None):
    """Decide whether a symmetric matrix is positive semidefinite.

    The matrix is symmetrized first; an asymmetry larger than ``tol.sub``
    (relative) raises :class:`ConditionViolation`. When the check fails the
    verdict carries a unit eigenvector with negative quadratic value.
    """
    tol = resolve_tol(tol)
    A = _symmetrized(Ssym, tol)
    if A.size == 0:
        return PsdVerdict(True, 0.0, 0.0)
    w, V = np.linalg.eigh(A)
    if scale is None:
        scale = max(np.linalg.norm(A, 2), 1.0)
    threshold = tol.psd * scale
    if w[0] >= -threshold:
        return PsdVerdict(True, float(w[0]), threshold)
    return PsdVerdict(False, float(w[0]), threshold, witness=V[:, 0].copy())


def _sign_normalize(V):
    V = V.copy()
    for j in range(V.shape[1]):
        i = np.argmax(np.abs(V[:, j]))
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return V


def psd_rank_factor(Rs, tol=None, scale=None):
    """Factor a PSD matrix as ``Rs = G @ Rt @ G.T`` with ``Rt`` positive definite.

    ``G`` has orthonormal columns, one per nonzero eigenvalue, so its column
    count is the numerical rank of ``Rs`` (relative to ``scale`` if given).

    Raises
    ------
    ConditionViolation
        If ``Rs`` is indefinite.
    """
    tol = resolve_tol(tol)
    verdict = psd_cone_check(Rs, tol)
    if not verdict.psd:
        raise ConditionViolation(
            "psd",
            f"matrix is indefinite (min eigenvalue {verdict.min_eig:.3e})",
            residual=-verdict.min_eig,
            witness=verdict.witness,
        )
    A = _symmetrized(Rs, tol)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    w, V = np.linalg.eigh(A)
    wmax = max(abs(w[-1]), abs(w[0]), scale or 0.0)
    keep = w > tol.rank * wmax * n if wmax > 0 else np.zeros(n, dtype=bool)
    order = np.argsort(-w[keep], kind="stable")
    G = _sign_normalize(V[:, keep][:, order])
    Rt = np.diag(w[keep][order])
    return G, Rt


def eliminate_variables(rows, aux, tol=None):
    """Project existentially quantified variables out of a kernel relation.

    ``rows`` describes ``{v : rows @ v = 0}``; the columns listed in ``aux``
    are eliminated. Returns rows over the remaining columns (in their original
    order) whose kernel is the projection of the relation onto them. The
    returned rows may be rank deficient. Rank decisions on the eliminated
    block are made relative to the norm of the whole relation.
    """
    rows = as_matrix(rows)
    aux = np.asarray(aux, dtype=int)
    keep = np.setdiff1d(np.arange(rows.shape[1]), aux)
    if aux.size == 0:
        return rows[:, keep].copy()
    N = left_annihilator(rows[:, aux], tol, scale=np.linalg.norm(rows, 2))
    return N @ rows[:, keep]
