"""Subspaces of flow x effort pairing spaces and their classification.

A :class:`PairingLayout` lists named flow/effort pairs, e.g. the state pair
``x`` (flows ``f``, efforts ``e``), the resistive pair ``R`` and the port pair
``P``. Ambient coordinates are ordered pair by pair, flows before efforts::

    (f, e, f_R, e_R, f_P, e_P)

A :class:`LinearStructure` is a subspace of that ambient space, stored as an
orthonormal image basis together with its maximal annihilator (kernel rows)
and a classification computed once at construction.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ConditionViolation, DimensionError
from .linalg_core import (
    as_matrix,
    column_basis,
    left_annihilator,
    max_principal_angle,
    null_space,
    numerical_rank,
    psd_cone_check,
    resolve_tol,
    skew_symmetric_split,
)

__all__ = [
    "PairingLayout",
    "Classification",
    "LinearStructure",
    "BilinearForm",
    "bilinear_form",
    "classify",
    "dirac_from_kernel",
    "lagrange_from_PS",
    "monotone_from_image",
    "graph_structure",
    "kernel_rep",
    "image_rep",
    "lagrange_pair",
    "WeakResistiveWarning",
]


class WeakResistiveWarning(UserWarning):
    """A resistive relation is monotone but not a Lagrange structure."""


@dataclass(frozen=True)
class PairingLayout:
    """Ordered, named flow/effort pairs.

    Use :meth:`standard` for the usual ``(x, R, P)`` layout; pairs of size zero
    other than ``x`` are omitted there.
    """

    pairs: tuple

    def __post_init__(self):
        pairs = tuple((str(name), int(dim)) for name, dim in self.pairs)
        names = [name for name, _ in pairs]
        if len(set(names)) != len(names):
            raise DimensionError(f"duplicate pair names in layout: {names}")
        if any(dim < 0 for _, dim in pairs):
            raise DimensionError("pair dimensions must be nonnegative")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def standard(cls, n, r=0, p=0):
        pairs = [("x", n)]
        if r:
            pairs.append(("R", r))
        if p:
            pairs.append(("P", p))
        return cls(tuple(pairs))

    @classmethod
    def single(cls, n, name="x"):
        return cls(((name, n),))

    @property
    def names(self):
        return tuple(name for name, _ in self.pairs)

    def dim(self, name):
        for pname, d in self.pairs:
            if pname == name:
                return d
        return 0

    def __contains__(self, name):
        return name in self.names

    @property
    def n(self):
        return self.dim("x")

    @property
    def r(self):
        return self.dim("R")

    @property
    def p(self):
        return self.dim("P")

    @property
    def size(self):
        """Total flow dimension (``n + r + p`` for the standard layout)."""
        return sum(d for _, d in self.pairs)

    @property
    def ambient(self):
        return 2 * self.size

    def _offset(self, name):
        off = 0
        for pname, d in self.pairs:
            if pname == name:
                return off, d
            off += 2 * d
        raise KeyError(f"no pair named {name!r} in layout {self.names}")

    def flow_index(self, name=None):
        """Ambient indices of the flows of one pair, or of all pairs in order."""
        if name is None:
            return np.concatenate([self.flow_index(nm) for nm in self.names] or [[]]).astype(int)
        off, d = self._offset(name)
        return np.arange(off, off + d)

    def effort_index(self, name=None):
        if name is None:
            return np.concatenate([self.effort_index(nm) for nm in self.names] or [[]]).astype(int)
        off, d = self._offset(name)
        return np.arange(off + d, off + 2 * d)

    def joint_offset(self, name):
        """Offset of a pair inside the joint flow (or joint effort) vector."""
        off = 0
        for pname, d in self.pairs:
            if pname == name:
                return off
            off += d
        raise KeyError(name)

    def interleave(self, flows, efforts):
        """Assemble ambient rows from joint flow rows and joint effort rows."""
        flows = np.atleast_2d(flows) if np.ndim(flows) else flows
        out = np.zeros((self.ambient,) + np.shape(flows)[1:])
        out[self.flow_index()] = flows
        out[self.effort_index()] = efforts
        return out

    def without(self, name):
        return PairingLayout(tuple(pr for pr in self.pairs if pr[0] != name))

    def plus_matrix(self):
        return _form_matrix(self, +1)

    def minus_matrix(self):
        return _form_matrix(self, -1)


def _form_matrix(layout, sign):
    Pi = np.zeros((layout.ambient, layout.ambient))
    fi, ei = layout.flow_index(), layout.effort_index()
    Pi[fi, ei] = float(sign)
    Pi[ei, fi] = 1.0
    return Pi


@dataclass(frozen=True)
class BilinearForm:
    """One of the two canonical pairings on a layout.

    ``kind == "plus"`` gives the symmetric form whose quadratic value is
    ``2 <e|f>``; ``kind == "minus"`` gives the symplectic form.
    """

    kind: str
    matrix: np.ndarray

    def __call__(self, w1, w2):
        return float(np.asarray(w1) @ self.matrix @ np.asarray(w2))


def bilinear_form(layout, kind="plus"):
    if kind == "plus":
        return BilinearForm("plus", layout.plus_matrix())
    if kind == "minus":
        return BilinearForm("minus", layout.minus_matrix())
    raise ValueError(f"unknown bilinear form kind {kind!r}")


@dataclass(frozen=True)
class Classification:
    dirac: bool
    lagrange: bool
    nonneg_lagrange: bool
    monotone: bool
    maximal_monotone: bool
    dim: int
    expected_dim: int
    plus_residual: float
    minus_residual: float
    min_plus_eig: float

    def flags(self):
        return {
            "dirac": self.dirac,
            "lagrange": self.lagrange,
            "nonneg_lagrange": self.nonneg_lagrange,
            "monotone": self.monotone,
            "maximal_monotone": self.maximal_monotone,
        }


def _classify_basis(layout, W, tol):
    k = W.shape[1]
    Gp = W.T @ layout.plus_matrix() @ W
    Gm = W.T @ layout.minus_matrix() @ W
    plus_res = float(np.linalg.norm(Gp, 2)) if k else 0.0
    minus_res = float(np.linalg.norm(Gm, 2)) if k else 0.0
    # W is orthonormal and ||Pi_+|| = 1, so an absolute PSD scale of 1 is exact
    verdict = psd_cone_check(Gp, tol, scale=1.0)
    full = k == layout.size
    lagrange = full and minus_res <= tol.sub
    return Classification(
        dirac=full and plus_res <= tol.sub,
        lagrange=lagrange,
        nonneg_lagrange=lagrange and verdict.psd,
        monotone=verdict.psd,
        maximal_monotone=verdict.psd and full,
        dim=k,
        expected_dim=layout.size,
        plus_residual=plus_res,
        minus_residual=minus_res,
        min_plus_eig=verdict.min_eig,
    )


class LinearStructure:
    """A subspace of the ambient space of a :class:`PairingLayout`.

    Parameters
    ----------
    layout : PairingLayout
    spanning : array_like
        Matrix whose columns span the subspace (any rank); it is
        orthonormalized on construction.
    tol : Tolerance, optional
    params : dict, optional
        Representation matrices as supplied by the caller (``P``/``S``,
        ``K``/``L``..., graph map). Kept so that realizations can use the
        caller's coordinates.
    supplied_kernel : array_like, optional
        Full-row-rank kernel rows as supplied by the caller.

    Instances are immutable; arrays are flagged read-only.
    """

    __slots__ = ("layout", "basis", "kernel", "classification", "params",
                 "supplied_kernel", "tol")

    def __init__(self, layout, spanning, tol=None, params=None, supplied_kernel=None):
        tol = resolve_tol(tol)
        A = as_matrix(spanning, rows=layout.ambient, name="spanning matrix")
        W = column_basis(A, tol)
        K = left_annihilator(W, tol) if W.shape[1] else np.eye(layout.ambient)
        for arr in (W, K):
            arr.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "basis", W)
        object.__setattr__(self, "kernel", K)
        object.__setattr__(self, "tol", tol)
        object.__setattr__(self, "classification", _classify_basis(layout, W, tol))
        frozen = {}
        for key, val in (params or {}).items():
            arr = np.array(val, dtype=float)
            arr.setflags(write=False)
            frozen[key] = arr
        object.__setattr__(self, "params", frozen)
        if supplied_kernel is not None:
            supplied_kernel = np.array(supplied_kernel, dtype=float)
            supplied_kernel.setflags(write=False)
        object.__setattr__(self, "supplied_kernel", supplied_kernel)

    def __setattr__(self, name, value):
        raise AttributeError("LinearStructure is immutable")

    def __repr__(self):
        flags = [k for k, v in self.classification.flags().items() if v]
        return (f"LinearStructure(layout={self.layout.pairs}, dim={self.dim}, "
                f"flags={flags})")

    @classmethod
    def from_kernel(cls, layout, rows, tol=None, **kwargs):
        rows = as_matrix(rows, cols=layout.ambient, name="kernel rows")
        return cls(layout, null_space(rows, tol), tol, **kwargs)

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def flags(self):
        return self.classification.flags()

    def flow_rows(self, name=None):
        return self.basis[self.layout.flow_index(name)]

    def effort_rows(self, name=None):
        return self.basis[self.layout.effort_index(name)]

    def kernel_block(self, name, part, supplied=True):
        """Columns of the kernel rows belonging to one flow or effort block."""
        K = self.supplied_kernel if (supplied and self.supplied_kernel is not None) else self.kernel
        idx = self.layout.flow_index(name) if part == "f" else self.layout.effort_index(name)
        return K[:, idx]

    def contains(self, vec, tol=None):
        tol = resolve_tol(tol)
        v = np.asarray(vec, dtype=float).ravel()
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return True
        return np.linalg.norm(self.kernel @ v) <= tol.sub * nv

    def angle_to(self, other):
        if self.layout.ambient != other.layout.ambient:
            raise DimensionError("structures live in different ambient spaces")
        return max_principal_angle(self.basis, other.basis, self.tol)

    def equals(self, other, tol=None):
        tol = resolve_tol(tol) if tol is not None else self.tol
        if self.layout.ambient != other.layout.ambient:
            return False
        return max_principal_angle(self.basis, other.basis, tol) <= tol.sub

    def reorder(self, names):
        """Same subspace with the pairs permuted into the order ``names``."""
        if sorted(names) != sorted(self.layout.names):
            raise DimensionError(f"reorder needs a permutation of {self.layout.names}")
        new_layout = PairingLayout(tuple((nm, self.layout.dim(nm)) for nm in names))
        perm = np.concatenate(
            [np.concatenate([self.layout.flow_index(nm), self.layout.effort_index(nm)])
             for nm in names] or [[]]
        ).astype(int)
        return LinearStructure(new_layout, self.basis[perm], self.tol, params=self.params)

    def rename(self, mapping):
        new_layout = PairingLayout(tuple((mapping.get(nm, nm), d) for nm, d in self.layout.pairs))
        return LinearStructure(new_layout, self.basis, self.tol, params=self.params,
                               supplied_kernel=self.supplied_kernel)


def classify(S, tol=None):
    """Classification flags of a structure (recomputed at ``tol`` if given)."""
    if tol is None:
        return S.classification
    return _classify_basis(S.layout, S.basis, tol)


def _kernel_residual(rows, layout):
    return rows @ layout.plus_matrix() @ rows.T


def dirac_from_kernel(K, L, K_R=None, L_R=None, K_P=None, L_P=None, layout=None, tol=None):
    """Dirac structure ``{K f + L e + K_R f_R + L_R e_R + K_P f_P + L_P e_P = 0}``.

    Accepted iff ``K L^T + L K^T + K_R L_R^T + L_R K_R^T + K_P L_P^T + L_P K_P^T = 0``
    and the stacked matrix has full row rank ``n + r + p``.

    Raises
    ------
    ConditionViolation
        ``condition == "kl_symmetric"`` or ``"kl_rank"``.
    """
    tol = resolve_tol(tol)
    K = as_matrix(K, name="K")
    N, n = K.shape
    if layout is None:
        r = 0 if K_R is None else as_matrix(K_R).shape[1]
        p = 0 if K_P is None else as_matrix(K_P).shape[1]
        layout = PairingLayout.standard(n, r, p)
    n, r, p = layout.n, layout.r, layout.p
    blocks = {
        "K": as_matrix(K, N, n, "K"),
        "L": as_matrix(L, N, n, "L"),
        "K_R": as_matrix(K_R if K_R is not None else np.zeros((N, 0)), N, r, "K_R"),
        "L_R": as_matrix(L_R if L_R is not None else np.zeros((N, 0)), N, r, "L_R"),
        "K_P": as_matrix(K_P if K_P is not None else np.zeros((N, 0)), N, p, "K_P"),
        "L_P": as_matrix(L_P if L_P is not None else np.zeros((N, 0)), N, p, "L_P"),
    }
    rows = np.zeros((N, layout.ambient))
    for name, fkey, ekey in (("x", "K", "L"), ("R", "K_R", "L_R"), ("P", "K_P", "L_P")):
        if name in layout:
            rows[:, layout.flow_index(name)] = blocks[fkey]
            rows[:, layout.effort_index(name)] = blocks[ekey]
    scale = max(np.linalg.norm(rows, 2) ** 2, 1.0)
    residual = _kernel_residual(rows, layout)
    res = float(np.linalg.norm(residual, 2))
    if res > tol.sub * scale:
        raise ConditionViolation(
            "kl_symmetric",
            f"K L^T + L K^T + ... is not zero (norm {res:.6g})",
            residual=res,
        )
    rank = numerical_rank(rows, tol)
    if rank != layout.size:
        raise ConditionViolation(
            "kl_rank",
            f"rank [K L K_R L_R K_P L_P] = {rank}, expected {layout.size}",
            residual=float(layout.size - rank),
        )
    S = LinearStructure.from_kernel(layout, rows, tol, params=blocks, supplied_kernel=rows)
    assert S.classification.dirac, S.classification
    return S


def lagrange_from_PS(P, S, tol=None, name="x"):
    """Lagrange structure ``im [P; S]`` on a single pair.

    Accepted iff ``S^T P`` is symmetric and ``rank [P; S] = n``. The structure
    is nonnegative iff additionally ``S^T P >= 0``.
    """
    tol = resolve_tol(tol)
    P = as_matrix(P, name="P")
    n = P.shape[0]
    P = as_matrix(P, n, n, "P")
    S = as_matrix(S, n, n, "S")
    StP = S.T @ P
    scale = max(np.linalg.norm(P, 2) * np.linalg.norm(S, 2), 1.0)
    asym = float(np.linalg.norm(StP - StP.T, 2)) if n else 0.0
    if asym > tol.sub * scale:
        raise ConditionViolation(
            "sp_symmetric", f"S^T P is not symmetric (asymmetry {asym:.6g})", residual=asym
        )
    stacked = np.vstack([P, S])
    rank = numerical_rank(stacked, tol)
    if rank != n:
        raise ConditionViolation(
            "sp_rank", f"rank [P; S] = {rank}, expected {n}", residual=float(n - rank)
        )
    layout = PairingLayout.single(n, name)
    return LinearStructure(layout, stacked, tol, params={"P": P, "S": S},
                           supplied_kernel=np.hstack([S.T, -P.T]))


def monotone_from_image(Z, Y, Z_P=None, Y_P=None, layout=None, tol=None):
    """Maximally monotone structure ``im [Z^T; Y^T; Z_P^T; Y_P^T]``.

    Accepted iff ``Y Z^T + Z Y^T + Y_P Z_P^T + Z_P Y_P^T >= 0`` and
    ``rank [Z Y Z_P Y_P] = n + p``.

    Raises
    ------
    ConditionViolation
        ``condition == "yz_psd"`` (with a witness) or ``"yz_rank"``.
    """
    tol = resolve_tol(tol)
    Z = as_matrix(Z, name="Z")
    k, n = Z.shape
    Y = as_matrix(Y, k, n, "Y")
    if layout is None:
        p = 0 if Z_P is None else as_matrix(Z_P).shape[1]
        layout = PairingLayout.standard(n, 0, p)
    if layout.r:
        raise DimensionError("monotone_from_image expects a layout without a resistive pair")
    p = layout.p
    Z_P = as_matrix(Z_P if Z_P is not None else np.zeros((k, 0)), k, p, "Z_P")
    Y_P = as_matrix(Y_P if Y_P is not None else np.zeros((k, 0)), k, p, "Y_P")
    V = layout.interleave(np.hstack([Z, Z_P]).T, np.hstack([Y, Y_P]).T)
    form = Y @ Z.T + Z @ Y.T + Y_P @ Z_P.T + Z_P @ Y_P.T
    verdict = psd_cone_check(form, tol)
    if not verdict.psd:
        raise ConditionViolation(
            "yz_psd",
            f"Y Z^T + Z Y^T + ... has negative eigenvalue {verdict.min_eig:.6g}",
            residual=-verdict.min_eig,
            witness=verdict.witness,
        )
    rank = numerical_rank(np.hstack([Z, Y, Z_P, Y_P]), tol)
    if rank != n + p:
        raise ConditionViolation(
            "yz_rank", f"rank [Z Y Z_P Y_P] = {rank}, expected {n + p}",
            residual=float(n + p - rank),
        )
    S = LinearStructure(layout, V, tol, params={"Z": Z, "Y": Y, "Z_P": Z_P, "Y_P": Y_P})
    # the psd test above is on the parametrization; recheck on the subspace itself
    if not S.classification.maximal_monotone:
        raise ConditionViolation(
            "yz_rank", f"image has dimension {S.dim}, expected {layout.size}",
            residual=float(layout.size - S.dim),
        )
    return S


_GRAPH_KINDS = {"skew": "dirac", "symmetric": "lagrange", "monotone": "maximal_monotone"}


def graph_structure(Mmap, kind="monotone", layout=None, tol=None):
    """Graph ``{(Mmap e, e)}`` of a square map from joint efforts to joint flows.

    ``kind`` is ``"skew"`` (Dirac), ``"symmetric"`` (Lagrange) or
    ``"monotone"`` (maximally monotone); the matrix condition of the kind is
    checked before the structure is built.
    """
    tol = resolve_tol(tol)
    if kind not in _GRAPH_KINDS:
        raise ValueError(f"unknown graph kind {kind!r}")
    M = as_matrix(Mmap, name="graph map")
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"graph map must be square, got {M.shape}")
    if layout is None:
        layout = PairingLayout.single(M.shape[0])
    if layout.size != M.shape[0]:
        raise DimensionError(f"graph map is {M.shape[0]}x{M.shape[0]}, layout size {layout.size}")
    scale = max(np.linalg.norm(M, 2), 1.0) if M.size else 1.0
    J, Rs = skew_symmetric_split(M)
    if kind == "skew":
        res = float(np.linalg.norm(Rs, 2)) if M.size else 0.0
        if res > tol.sub * scale:
            raise ConditionViolation("graph_kind", f"map is not skew (||sym part|| = {res:.6g})",
                                     residual=res)
    elif kind == "symmetric":
        res = float(np.linalg.norm(J, 2)) if M.size else 0.0
        if res > tol.sub * scale:
            raise ConditionViolation("graph_kind", f"map is not symmetric (||skew part|| = {res:.6g})",
                                     residual=res)
    else:
        verdict = psd_cone_check(Rs, tol)
        if not verdict.psd:
            raise ConditionViolation(
                "graph_kind", f"map is not monotone (min eig of sym part {verdict.min_eig:.6g})",
                residual=-verdict.min_eig, witness=verdict.witness,
            )
    size = layout.size
    V = layout.interleave(M, np.eye(size))
    rows = np.zeros((size, layout.ambient))
    rows[:, layout.flow_index()] = np.eye(size)
    rows[:, layout.effort_index()] = -M
    S = LinearStructure(layout, V, tol, params={"M": M}, supplied_kernel=rows)
    flag = _GRAPH_KINDS[kind]
    if not S.flags[flag]:
        raise ConditionViolation("graph_kind", f"graph is not classified {flag}")
    return S


def kernel_rep(S):
    """Orthonormal kernel rows ``A`` with ``ker A = S``."""
    return S.kernel.copy()


def image_rep(rows, layout, tol=None):
    """Structure ``ker rows``; the rows must have full row rank."""
    tol = resolve_tol(tol)
    rows = as_matrix(rows, cols=layout.ambient, name="kernel rows")
    rank = numerical_rank(rows, tol)
    if rank != rows.shape[0]:
        raise ConditionViolation(
            "kernel_rank", f"kernel rows have rank {rank} < {rows.shape[0]}",
            residual=float(rows.shape[0] - rank),
        )
    return LinearStructure.from_kernel(layout, rows, tol, supplied_kernel=rows)


def lagrange_pair(L):
    """``(P, S)`` parametrizing a Lagrange structure on a single pair.

    Uses the matrices supplied at construction when available, otherwise the
    flow and effort rows of the orthonormal basis.
    """
    if "P" in L.params and "S" in L.params:
        return np.array(L.params["P"]), np.array(L.params["S"])
    if len(L.layout.pairs) != 1:
        raise DimensionError("a Lagrange parametrization needs a single-pair layout")
    return L.flow_rows().copy(), L.effort_rows().copy()


def check_resistive(Rres, tol=None):
    """Verify that ``Rres`` is a nonnegative Lagrange structure.

    A structure that is monotone but not Lagrange only satisfies the weakened
    requirement ``e_R^T f_R >= 0``; it still yields an energy balance, but the
    (D, L, R) and (M, L) descriptions are then no longer equivalent. Such
    input triggers a :class:`WeakResistiveWarning` before being rejected.
    """
    c = classify(Rres, tol)
    if c.nonneg_lagrange:
        return
    if c.monotone:
        warnings.warn(
            "resistive relation is monotone but not a Lagrange structure; "
            "the (D, L, R) and (M, L) descriptions are not equivalent for it",
            WeakResistiveWarning,
            stacklevel=2,
        )
    raise ConditionViolation(
        "resistive", "resistive relation is not a nonnegative Lagrange structure",
        residual=max(c.minus_residual, -c.min_plus_eig, float(c.expected_dim - c.dim)),
    )
