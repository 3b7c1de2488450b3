"""Geometry of maximally monotone structures.

Defect subspaces, embedding into the graph of a monotone map with Lagrange
multipliers, composition through shared flow/effort pairs, and the
decomposition of a maximally monotone structure into a Dirac structure
composed with a resistive structure.

All operations treat every pair of the layout jointly: the flow space is
``F x F_R x F_P`` (in layout order) and likewise for efforts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConditionViolation, DimensionError, NotMaximalMonotone
from .linalg_core import (
    column_basis,
    eliminate_variables,
    left_annihilator,
    max_principal_angle,
    null_space,
    psd_rank_factor,
    resolve_tol,
    skew_symmetric_split,
)
from .structures import LinearStructure, PairingLayout, graph_structure

__all__ = [
    "DefectSpaces",
    "GraphEmbedding",
    "DiracResistivePair",
    "defect_spaces",
    "embed_as_graph",
    "compose",
    "split_dirac_resistive",
]


def _require_maximal_monotone(M, what):
    c = M.classification
    if not c.maximal_monotone:
        raise NotMaximalMonotone(
            "maximal_monotone",
            f"{what} needs a maximally monotone structure "
            f"(dim {c.dim}/{c.expected_dim}, min eig {c.min_plus_eig:.3e})",
            residual=max(float(c.expected_dim - c.dim), -c.min_plus_eig),
        )


@dataclass(frozen=True)
class DefectSpaces:
    """Orthonormal bases of the four defect subspaces of a structure.

    ``F0`` holds flows paired with zero effort, ``F1`` all flows that occur,
    ``E0`` efforts paired with zero flow and ``E1`` all efforts that occur.
    ``angle_F`` and ``angle_E`` are the measured principal angles between
    ``F0`` and the orthogonal complement of ``E1``, and between ``E0`` and that
    of ``F1``.
    """

    F0: np.ndarray
    F1: np.ndarray
    E0: np.ndarray
    E1: np.ndarray
    angle_F: float
    angle_E: float


def defect_spaces(M, tol=None):
    """Compute ``F0, F1, E0, E1`` and check ``F0 = E1^perp``, ``E0 = F1^perp``.

    Raises
    ------
    NotMaximalMonotone
        If ``M`` is not maximally monotone.
    ConditionViolation
        If the orthogonality identities fail numerically (ill-conditioned input).
    """
    tol = resolve_tol(tol)
    _require_maximal_monotone(M, "defect_spaces")
    Wf, We = M.flow_rows(), M.effort_rows()
    # blocks of an orthonormal basis: rank decisions relative to 1
    F1 = column_basis(Wf, tol, scale=1.0)
    E1 = column_basis(We, tol, scale=1.0)
    F0 = column_basis(Wf @ null_space(We, tol, scale=1.0), tol, scale=1.0)
    E0 = column_basis(We @ null_space(Wf, tol, scale=1.0), tol, scale=1.0)
    angle_F = max_principal_angle(F0, left_annihilator(E1, tol).T, tol)
    angle_E = max_principal_angle(E0, left_annihilator(F1, tol).T, tol)
    if max(angle_F, angle_E) > tol.sub:
        raise ConditionViolation(
            "defect_identity",
            f"orthogonality of defect spaces fails (angles {angle_F:.3e}, {angle_E:.3e})",
            residual=max(angle_F, angle_E),
        )
    return DefectSpaces(F0, F1, E0, E1, angle_F, angle_E)


@dataclass(frozen=True)
class GraphEmbedding:
    """``M = {(f, e) : exists lam, f = Mmap e - G lam, G^T e = 0}``.

    ``Mmap`` is monotone on all joint efforts; ``G`` has orthonormal columns
    spanning the flows paired with zero effort.
    """

    layout: PairingLayout
    Mmap: np.ndarray
    G: np.ndarray
    E1: np.ndarray

    @property
    def multiplier_dim(self):
        return self.G.shape[1]

    def block(self, name):
        """Rows of ``G`` belonging to one pair."""
        off = self.layout.joint_offset(name)
        return self.G[off:off + self.layout.dim(name)]

    def relation_rows(self):
        """Kernel rows over ``(f_joint, e_joint, lam)`` of the defining relation."""
        N, m = self.G.shape
        top = np.hstack([np.eye(N), -self.Mmap, self.G])
        bottom = np.hstack([np.zeros((m, N)), self.G.T, np.zeros((m, m))])
        return np.vstack([top, bottom])

    def structure(self, tol=None):
        """Rebuild the structure from ``(Mmap, G)`` by eliminating the multipliers."""
        tol = resolve_tol(tol)
        N, m = self.G.shape
        rows = eliminate_variables(self.relation_rows(), np.arange(2 * N, 2 * N + m), tol)
        ambient = np.zeros((rows.shape[0], self.layout.ambient))
        ambient[:, self.layout.flow_index()] = rows[:, :N]
        ambient[:, self.layout.effort_index()] = rows[:, N:]
        return LinearStructure(self.layout, null_space(ambient, tol), tol)


def embed_as_graph(M, tol=None):
    """Represent a maximally monotone structure as a multiplier-augmented graph.

    The map is read off on the effort range ``E1``, with flows projected onto
    ``E1`` (they are defined only modulo ``E1^perp``), and extended to all
    efforts by composing with the orthogonal projector onto ``E1``.
    """
    tol = resolve_tol(tol)
    _require_maximal_monotone(M, "embed_as_graph")
    Wf, We = M.flow_rows(), M.effort_rows()
    U = column_basis(We, tol, scale=1.0)
    G = left_annihilator(U, tol).T
    X = np.linalg.lstsq(We, U, rcond=None)[0]
    M1 = U.T @ (Wf @ X)
    Mmap = U @ M1 @ U.T
    return GraphEmbedding(M.layout, Mmap, G, U)


def _merge_layouts(first, second):
    taken = set(first.names)
    pairs = list(first.pairs)
    renames = {}
    for name, dim in second.pairs:
        new = name
        k = 2
        while new in taken:
            new = f"{name}_{k}"
            k += 1
        renames[name] = new
        taken.add(new)
        pairs.append((new, dim))
    return PairingLayout(tuple(pairs)), renames


def compose(M1, M2, shared=("R", "R"), tol=None):
    """Interconnect two structures through one shared flow/effort pair.

    Returns ``{(w1, w2) : exists (f, e), (w1, f, e) in M1, (w2, -f, e) in M2}``
    over the pairs of ``M1`` without the shared one, followed by those of
    ``M2`` (renamed with a numeric suffix on collision).

    ``shared`` is a pair name used on both sides or a tuple of the two names.
    If both inputs are maximally monotone, so must be the result; this is
    verified and a :class:`ConditionViolation` raised otherwise.
    """
    tol = resolve_tol(tol)
    s1, s2 = (shared, shared) if isinstance(shared, str) else shared
    L1, L2 = M1.layout, M2.layout
    if s1 not in L1 or s2 not in L2:
        raise DimensionError(f"shared pair {shared!r} missing from a layout")
    if L1.dim(s1) != L2.dim(s2):
        raise DimensionError(
            f"shared pair dimensions differ: {L1.dim(s1)} vs {L2.dim(s2)}"
        )
    a1, a2 = L1.ambient, L2.ambient
    d = L1.dim(s1)
    A1, A2 = M1.kernel, M2.kernel
    rows = np.zeros((A1.shape[0] + A2.shape[0] + 2 * d, a1 + a2))
    rows[:A1.shape[0], :a1] = A1
    rows[A1.shape[0]:A1.shape[0] + A2.shape[0], a1:] = A2
    f1, e1 = L1.flow_index(s1), L1.effort_index(s1)
    f2, e2 = a1 + L2.flow_index(s2), a1 + L2.effort_index(s2)
    base = A1.shape[0] + A2.shape[0]
    eye = np.eye(d)
    # the second structure sees the shared flow with opposite sign
    rows[base:base + d, f1] = eye
    rows[base:base + d, f2] = eye
    rows[base + d:, e1] = eye
    rows[base + d:, e2] = -eye
    aux = np.concatenate([f1, e1, f2, e2])
    reduced = eliminate_variables(rows, aux, tol)
    layout, _ = _merge_layouts(L1.without(s1), L2.without(s2))
    result = LinearStructure(layout, null_space(reduced, tol), tol)
    if (M1.classification.maximal_monotone and M2.classification.maximal_monotone
            and not result.classification.maximal_monotone):
        c = result.classification
        raise ConditionViolation(
            "composition_maximality",
            f"composition of maximally monotone structures is not maximally monotone "
            f"(dim {c.dim}/{c.expected_dim}, min eig {c.min_plus_eig:.3e})",
            residual=max(float(c.expected_dim - c.dim), -c.min_plus_eig),
        )
    return result


@dataclass(frozen=True)
class DiracResistivePair:
    """Dirac structure ``D`` and resistive structure ``Rres`` with ``D o Rres = M``.

    ``J`` is the skew part and ``G`` the multiplier map of the graph embedding,
    ``G_R`` maps resistive efforts in (identity unless reduced) and
    ``R_res`` is the resistance matrix.
    """

    D: LinearStructure
    Rres: LinearStructure
    reduced: bool
    J: np.ndarray
    G: np.ndarray
    G_R: np.ndarray
    R_res: np.ndarray
    resistive_name: str = "R"

    def recompose(self, tol=None):
        return compose(self.D, self.Rres, shared=self.resistive_name, tol=tol)


def split_dirac_resistive(M, reduce=False, tol=None, name="R"):
    """Write a maximally monotone ``M`` as ``D o Rres``.

    With ``M`` embedded as ``f = (-J + Rs) e - G lam``, ``G^T e = 0``, the Dirac
    structure is::

        f = -J e - G lam - G_R f_R,   G^T e = 0,   e_R = G_R^T e

    and ``Rres = graph(R_res)`` with ``Rs = G_R R_res G_R^T``. Without
    ``reduce``, ``G_R = I`` and ``R_res = Rs``; with ``reduce`` the resistive
    pair has dimension ``rank(Rs)`` and ``R_res`` is positive definite.
    """
    tol = resolve_tol(tol)
    _require_maximal_monotone(M, "split_dirac_resistive")
    if name in M.layout:
        raise DimensionError(f"structure already has a pair named {name!r}")
    emb = embed_as_graph(M, tol)
    J, Rs = skew_symmetric_split(emb.Mmap)
    N = Rs.shape[0]
    if reduce:
        # Mmap is read off an orthonormal basis: never decide rank below unit scale
        mnorm = np.linalg.norm(emb.Mmap, 2) if emb.Mmap.size else 0.0
        G_R, R_res = psd_rank_factor(Rs, tol, scale=max(mnorm, 1.0))
    else:
        G_R, R_res = np.eye(N), Rs
    rho = G_R.shape[1]
    U, G = emb.E1, emb.G
    k, m = U.shape[1], G.shape[1]
    layout = PairingLayout(M.layout.pairs + ((name, rho),))
    # parameters (c, lam, phi): e = U c, resistive flow phi
    cols = k + m + rho
    flows = np.hstack([-J @ U, -G, -G_R])
    efforts = np.hstack([U, np.zeros((N, m + rho))])
    V = np.zeros((layout.ambient, cols))
    V[layout.flow_index()[:N]] = flows
    V[layout.effort_index()[:N]] = efforts
    V[layout.flow_index(name)] = np.hstack([np.zeros((rho, k + m)), np.eye(rho)])
    V[layout.effort_index(name)] = np.hstack([G_R.T @ U, np.zeros((rho, m + rho))])
    D = LinearStructure(layout, V, tol, params={"J": J, "G": G, "G_R": G_R})
    if not D.classification.dirac:
        c = D.classification
        raise ConditionViolation(
            "split_dirac", f"constructed interconnection is not Dirac "
            f"(residual {c.plus_residual:.3e}, dim {c.dim}/{c.expected_dim})",
            residual=c.plus_residual,
        )
    Rres = graph_structure(R_res, "symmetric", PairingLayout.single(rho, name), tol)
    if not Rres.classification.nonneg_lagrange:
        raise ConditionViolation("split_resistive", "resistive part is not nonnegative")
    return DiracResistivePair(D, Rres, bool(reduce), J, G, G_R, R_res, name)
