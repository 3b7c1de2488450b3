"""Port-Hamiltonian DAE systems and their coordinate realizations.

Sign table (all realizations):

=====================  ==========================================
structure variable     substituted by
=====================  ==========================================
state flow ``f``       ``-xdot = -P zdot``
state effort ``e``     ``S z``
resistive flow         ``-f_R`` in ``D``; ``(f_R, e_R)`` in ``Rres``
port flow ``f_P``      output ``y``
port effort ``e_P``    input ``u``
=====================  ==========================================

so that along solutions ``d/dt H(z) = -e_R^T f_R + e_P^T f_P`` with
``H(z) = z^T S^T P z / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConditionViolation, DimensionError
from .linalg_core import (
    as_matrix,
    eliminate_variables,
    left_annihilator,
    null_space,
    numerical_rank,
    psd_cone_check,
    resolve_tol,
)
from .monotone_ops import compose, embed_as_graph, split_dirac_resistive
from .structures import LinearStructure, PairingLayout, check_resistive, lagrange_pair

__all__ = [
    "PhDaeDLR",
    "PhDaeML",
    "StructuredRealization",
    "DescriptorRealization",
    "realize_dlr",
    "realize_ml_structured",
    "realize_ml_annihilator",
    "dlr_to_ml",
    "ml_to_dlr",
    "hamiltonian",
    "hamiltonian_augmented",
    "admissible_set",
    "realize",
    "default_route",
    "ROUTES",
]


def _sym(A):
    return 0.5 * (A + A.T)


def _width(*arrays):
    for a in arrays:
        a = np.asarray(a)
        if a.ndim == 2:
            return a.shape[1]
    return 0


def _labels(prefix, k):
    return tuple(f"{prefix}{i + 1}" for i in range(k))


@dataclass(frozen=True)
class PhDaeDLR:
    """System given by a Dirac, a Lagrange and a resistive structure.

    ``D`` lives on the standard layout ``(x, R, P)``, ``L`` on ``x`` and
    ``Rres`` on a single pair of dimension ``r`` (``None`` when ``r == 0``).
    """

    D: LinearStructure
    L: LinearStructure
    Rres: LinearStructure | None = None

    def __post_init__(self):
        if not self.D.classification.dirac:
            raise ConditionViolation("dirac", "D is not a Dirac structure",
                                     residual=self.D.classification.plus_residual)
        if not self.L.classification.lagrange or len(self.L.layout.pairs) != 1:
            raise ConditionViolation("lagrange", "L is not a Lagrange structure on one pair",
                                     residual=self.L.classification.minus_residual)
        extra = set(self.D.layout.names) - {"x", "R", "P"}
        if extra:
            raise DimensionError(f"D has unexpected pairs {sorted(extra)}")
        if self.D.layout.n != self.L.layout.size:
            raise DimensionError(f"D has n = {self.D.layout.n}, L has n = {self.L.layout.size}")
        r = self.D.layout.r
        if self.Rres is None:
            if r:
                raise DimensionError("D has a resistive pair but no resistive structure given")
        else:
            if len(self.Rres.layout.pairs) != 1 or self.Rres.layout.size != r:
                raise DimensionError(f"resistive structure must be one pair of size {r}")
            check_resistive(self.Rres)

    @property
    def n(self):
        return self.D.layout.n

    @property
    def r(self):
        return self.D.layout.r

    @property
    def p(self):
        return self.D.layout.p

    @property
    def PS(self):
        return lagrange_pair(self.L)

    @property
    def PS_R(self):
        if self.Rres is None:
            return np.zeros((0, 0)), np.zeros((0, 0))
        return lagrange_pair(self.Rres)


@dataclass(frozen=True)
class PhDaeML:
    """System given by a maximally monotone and a Lagrange structure.

    ``M`` lives on the layout ``(x, P)`` and ``L`` on ``x``.
    """

    M: LinearStructure
    L: LinearStructure

    def __post_init__(self):
        c = self.M.classification
        if not c.maximal_monotone:
            raise ConditionViolation(
                "maximal_monotone", "M is not maximally monotone",
                residual=max(float(c.expected_dim - c.dim), -c.min_plus_eig),
            )
        if not self.L.classification.lagrange or len(self.L.layout.pairs) != 1:
            raise ConditionViolation("lagrange", "L is not a Lagrange structure on one pair",
                                     residual=self.L.classification.minus_residual)
        extra = set(self.M.layout.names) - {"x", "P"}
        if extra:
            raise DimensionError(f"M has unexpected pairs {sorted(extra)}")
        if self.M.layout.n != self.L.layout.size:
            raise DimensionError(f"M has n = {self.M.layout.n}, L has n = {self.L.layout.size}")

    @property
    def n(self):
        return self.M.layout.n

    @property
    def p(self):
        return self.M.layout.p

    @property
    def PS(self):
        return lagrange_pair(self.L)


@dataclass(frozen=True)
class DescriptorRealization:
    """Implicit system ``E wdot = A w + B_in u``, ``y = C_out w + D_out u``.

    The first ``n_z`` states are the Lagrange coordinates ``z``; the rest are
    auxiliary (multipliers, resistive variables, implicit port flows).
    ``hamiltonian_form`` is the symmetric matrix ``S^T P`` on ``z``;
    ``dissipation_form`` is a symmetric matrix over the stacked vector
    ``(v, w, u)`` (``v`` standing for ``wdot``) whose quadratic value is the
    dissipated power.
    """

    E: np.ndarray
    A: np.ndarray
    B_in: np.ndarray
    C_out: np.ndarray
    D_out: np.ndarray
    state_labels: tuple
    input_labels: tuple
    output_labels: tuple
    n_z: int
    hamiltonian_form: np.ndarray
    dissipation_form: np.ndarray
    route: str = ""

    def __post_init__(self):
        rows, nw = self.E.shape
        p = self.B_in.shape[1]
        checks = [
            self.A.shape == (rows, nw),
            self.B_in.shape[0] == rows,
            self.C_out.shape == (len(self.output_labels), nw),
            self.D_out.shape == (len(self.output_labels), p),
            len(self.state_labels) == nw,
            len(self.input_labels) == p,
            self.hamiltonian_form.shape == (self.n_z, self.n_z),
            self.dissipation_form.shape == (2 * nw + p, 2 * nw + p),
        ]
        if not all(checks):
            raise DimensionError("inconsistent descriptor realization dimensions")

    @property
    def n_states(self):
        return self.E.shape[1]

    @property
    def n_inputs(self):
        return self.B_in.shape[1]

    @property
    def n_outputs(self):
        return self.C_out.shape[0]

    @property
    def is_square(self):
        return self.E.shape[0] == self.E.shape[1]

    def algebraic_rows(self, tol=None):
        """Rows ``N`` with ``N E = 0``: the constraints ``N (A w + B_in u) = 0``."""
        scale = max(np.linalg.norm(self.E, 2), np.linalg.norm(self.A, 2)) if self.E.size else None
        return left_annihilator(self.E, tol, scale=scale)

    def relation_rows(self):
        """Kernel rows of the pointwise relation over ``(v, w, y, u)``."""
        rows, nw = self.E.shape
        q = self.n_outputs
        top = np.hstack([self.E, -self.A, np.zeros((rows, q)), -self.B_in])
        bottom = np.hstack([np.zeros((q, nw)), -self.C_out, np.eye(q), -self.D_out])
        return np.vstack([top, bottom])

    def output(self, w, u):
        return self.C_out @ w + self.D_out @ u

    def energy(self, w):
        z = np.asarray(w)[..., :self.n_z]
        return 0.5 * np.einsum("...i,ij,...j->...", z, self.hamiltonian_form, z)

    def dissipation(self, v, w, u):
        x = np.concatenate([v, w, u])
        return float(x @ self.dissipation_form @ x)

    def power_residual(self, v, w, u):
        """``z^T S^T P zdot + dissipation - u^T y``; zero on the relation."""
        v, w, u = (np.asarray(a, dtype=float) for a in (v, w, u))
        z, vz = w[:self.n_z], v[:self.n_z]
        y = self.output(w, u)
        return float(z @ self.hamiltonian_form @ vz + self.dissipation(v, w, u) - u @ y)


def _bilinear_block(size, a_idx, b_idx, K):
    """Symmetric matrix ``Q`` with ``x^T Q x = x[a]^T K x[b]``."""
    Q = np.zeros((size, size))
    Q[np.ix_(a_idx, b_idx)] += 0.5 * K
    Q[np.ix_(b_idx, a_idx)] += 0.5 * K.T
    return Q


def realize_dlr(sys):
    """Descriptor form of a (D, L, R) system in the coordinates ``z`` of ``L``.

    With kernel rows ``K f + L e + K_R f_R + L_R e_R + K_P f_P + L_P e_P = 0``
    of ``D`` and the membership ``(-xdot, e, -f_R, e_R, f_P, e_P) in D``::

        K P zdot = L S z - K_R f_R + L_R e_R + K_P f_P + L_P e_P
               0 = S_R^T f_R - P_R^T e_R

    States are ``(z, f_R, e_R, f_P)``; the input is ``e_P``, the output
    ``f_P``.
    """
    D = sys.D
    n, r, p = sys.n, sys.r, sys.p
    Kr = D.supplied_kernel
    if Kr is None or Kr.shape[0] != D.layout.size:
        Kr = D.kernel
    blk = {}
    for name in ("x", "R", "P"):
        if name in D.layout:
            blk[name] = (Kr[:, D.layout.flow_index(name)], Kr[:, D.layout.effort_index(name)])
        else:
            blk[name] = (np.zeros((Kr.shape[0], 0)), np.zeros((Kr.shape[0], 0)))
    (K, L), (K_R, L_R), (K_P, L_P) = blk["x"], blk["R"], blk["P"]
    P, S = sys.PS
    P_R, S_R = sys.PS_R
    N = Kr.shape[0]
    nw = n + 2 * r + p
    E = np.zeros((N + r, nw))
    A = np.zeros((N + r, nw))
    B = np.zeros((N + r, p))
    E[:N, :n] = K @ P
    A[:N, :n] = L @ S
    A[:N, n:n + r] = -K_R
    A[:N, n + r:n + 2 * r] = L_R
    A[:N, n + 2 * r:] = K_P
    B[:N] = L_P
    A[N:, n:n + r] = S_R.T
    A[N:, n + r:n + 2 * r] = -P_R.T
    C = np.zeros((p, nw))
    C[:, n + 2 * r:] = np.eye(p)
    size = 2 * nw + p
    fR = nw + n + np.arange(r)
    eR = nw + n + r + np.arange(r)
    diss = _bilinear_block(size, eR, fR, np.eye(r))
    return DescriptorRealization(
        E=E, A=A, B_in=B, C_out=C, D_out=np.zeros((p, p)),
        state_labels=_labels("z", n) + _labels("f_R", r) + _labels("e_R", r) + _labels("f_P", p),
        input_labels=_labels("e_P", p),
        output_labels=_labels("f_P", p),
        n_z=n,
        hamiltonian_form=_sym(S.T @ P),
        dissipation_form=diss,
        route="dlr",
    )


@dataclass(frozen=True)
class StructuredRealization:
    """Block matrices of the multiplier-augmented realization.

    ::

        P zdot = (J - R) S z + G lam + (B - V) u
             0 = G^T S z + G_P^T u
             y = (B + V)^T S z + (N + W) u - G_P lam

    The augmented pair ``P_a = diag(P, 0)``, ``S_a = diag(S, I)`` carries all
    algebraic constraints.
    """

    P: np.ndarray
    S: np.ndarray
    J: np.ndarray
    R: np.ndarray
    B: np.ndarray
    V: np.ndarray
    N: np.ndarray
    W: np.ndarray
    G: np.ndarray
    G_P: np.ndarray

    def __post_init__(self):
        n = np.shape(self.P)[0]
        p = _width(self.B, self.N)
        m = _width(self.G, self.G_P)
        shapes = {
            "P": (n, n), "S": (n, n), "J": (n, n), "R": (n, n), "B": (n, p), "V": (n, p),
            "N": (p, p), "W": (p, p), "G": (n, m), "G_P": (p, m),
        }
        for name, shape in shapes.items():
            arr = as_matrix(getattr(self, name), *shape, name=name)
            object.__setattr__(self, name, arr)

    @property
    def n(self):
        return self.P.shape[0]

    @property
    def p(self):
        return self.N.shape[0]

    @property
    def m(self):
        return self.G.shape[1]

    @property
    def P_a(self):
        n, m = self.n, self.m
        out = np.zeros((n + m, n + m))
        out[:n, :n] = self.P
        return out

    @property
    def S_a(self):
        n, m = self.n, self.m
        out = np.eye(n + m)
        out[:n, :n] = self.S
        return out

    @property
    def resistive_block(self):
        return np.block([[self.R, self.V], [self.V.T, self.W]])

    def monotone_map(self):
        """The joint monotone map on ``(e, e_P)``."""
        return np.block([[-self.J + self.R, -self.B + self.V],
                         [self.B.T + self.V.T, self.N + self.W]])

    def check(self, tol=None):
        """Verify the structural invariants; returns a dict of residuals.

        Raises :class:`ConditionViolation` on the first failure.
        """
        tol = resolve_tol(tol)
        res = {
            "J_skew": float(np.linalg.norm(self.J + self.J.T)) if self.n else 0.0,
            "N_skew": float(np.linalg.norm(self.N + self.N.T)) if self.p else 0.0,
        }
        for key in ("J_skew", "N_skew"):
            if res[key] > tol.sub:
                raise ConditionViolation(key, f"{key[0]} is not skew-symmetric", residual=res[key])
        verdict = psd_cone_check(self.resistive_block, tol)
        res["resistive_min_eig"] = verdict.min_eig
        if not verdict.psd:
            raise ConditionViolation("resistive_psd", "[[R, V], [V^T, W]] is not PSD",
                                     residual=-verdict.min_eig, witness=verdict.witness)
        rank = numerical_rank(np.vstack([self.P, self.S]), tol)
        res["PS_rank"] = rank
        if rank != self.n:
            raise ConditionViolation("sp_rank", f"rank [P; S] = {rank} != {self.n}",
                                     residual=float(self.n - rank))
        return res

    def descriptor(self):
        n, p, m = self.n, self.p, self.m
        nw = n + m
        JR = self.J - self.R
        A = np.block([[JR @ self.S, self.G], [self.G.T @ self.S, np.zeros((m, m))]])
        B = np.vstack([self.B - self.V, self.G_P.T])
        C = np.hstack([(self.B + self.V).T @ self.S, -self.G_P])
        T = np.zeros((n + p, 2 * nw + p))
        T[:n, nw:nw + n] = self.S
        T[n:, 2 * nw:] = np.eye(p)
        return DescriptorRealization(
            E=self.P_a, A=A, B_in=B, C_out=C, D_out=self.N + self.W,
            state_labels=_labels("z", n) + _labels("lambda", m),
            input_labels=_labels("e_P", p),
            output_labels=_labels("f_P", p),
            n_z=n,
            hamiltonian_form=_sym(self.S.T @ self.P),
            dissipation_form=T.T @ self.resistive_block @ T,
            route="structured",
        )


def realize_ml_structured(sys, tol=None):
    """Split the graph embedding of ``M`` into the blocks of the augmented realization."""
    tol = resolve_tol(tol)
    M = sys.M
    emb = embed_as_graph(M, tol)
    lay = M.layout
    ix = lay.joint_offset("x") + np.arange(lay.n)
    ip = (lay.joint_offset("P") + np.arange(lay.p)) if "P" in lay else np.arange(0)
    Mm = emb.Mmap
    Mee, MeP = Mm[np.ix_(ix, ix)], Mm[np.ix_(ix, ip)]
    MPe, MPP = Mm[np.ix_(ip, ix)], Mm[np.ix_(ip, ip)]
    P, S = sys.PS
    return StructuredRealization(
        P=P, S=S,
        J=0.5 * (Mee.T - Mee), R=_sym(Mee),
        B=0.5 * (MPe.T - MeP), V=0.5 * (MeP + MPe.T),
        N=0.5 * (MPP - MPP.T), W=_sym(MPP),
        G=emb.G[ix], G_P=emb.G[ip],
    )


def realize_ml_annihilator(sys, tol=None):
    """Kernel-form realization ``A P zdot = C S z + A_P f_P + C_P e_P``.

    ``[A C A_P C_P]`` is the maximal annihilator of the image of ``M``.
    States are ``(z, f_P)``.
    """
    M = sys.M
    lay = M.layout
    Kr = M.kernel
    n, p = sys.n, sys.p
    A_ = Kr[:, lay.flow_index("x")]
    C_ = Kr[:, lay.effort_index("x")]
    if p:
        A_P, C_P = Kr[:, lay.flow_index("P")], Kr[:, lay.effort_index("P")]
    else:
        A_P = C_P = np.zeros((Kr.shape[0], 0))
    P, S = sys.PS
    rows = Kr.shape[0]
    nw = n + p
    E = np.hstack([A_ @ P, np.zeros((rows, p))])
    A = np.hstack([C_ @ S, A_P])
    C = np.hstack([np.zeros((p, n)), np.eye(p)])
    size = 2 * nw + p
    # dissipated power <e|f> + <e_P|f_P> with f = -P v_z, e = S z
    diss = _bilinear_block(size, nw + np.arange(n), np.arange(n), -(S.T @ P))
    diss += _bilinear_block(size, 2 * nw + np.arange(p), nw + n + np.arange(p), np.eye(p))
    return DescriptorRealization(
        E=E, A=A, B_in=C_P, C_out=C, D_out=np.zeros((p, p)),
        state_labels=_labels("z", n) + _labels("f_P", p),
        input_labels=_labels("e_P", p),
        output_labels=_labels("f_P", p),
        n_z=n,
        hamiltonian_form=_sym(S.T @ P),
        dissipation_form=diss,
        route="annihilator",
    )


def dlr_to_ml(sys, tol=None):
    """``M = D o Rres`` over the resistive pair."""
    if sys.Rres is None:
        M = sys.D
    else:
        M = compose(sys.D, sys.Rres, shared=("R", sys.Rres.layout.names[0]), tol=tol)
    return PhDaeML(M, sys.L)


def ml_to_dlr(sys, reduce=False, tol=None):
    """Split ``M`` into Dirac and resistive parts (optionally rank-reduced)."""
    pair = split_dirac_resistive(sys.M, reduce=reduce, tol=tol)
    D = pair.D
    if D.layout.r == 0:
        # an empty pair has no rows, so the basis is unchanged without it
        D = LinearStructure(D.layout.without(pair.resistive_name), D.basis, D.tol)
        return PhDaeDLR(D.reorder([nm for nm in ("x", "P") if nm in D.layout]), sys.L, None)
    order = [nm for nm in ("x", "R", "P") if nm in D.layout]
    return PhDaeDLR(D.reorder(order), sys.L, pair.Rres)


ROUTES = ("dlr", "structured", "annihilator")


def default_route(sys):
    return "dlr" if isinstance(sys, PhDaeDLR) else "structured"


def realize(sys, route=None, tol=None):
    """Descriptor realization of either system type along ``route``.

    ``"dlr"`` splits an (M, L) system first; the other two routes compose a
    (D, L, R) system first.
    """
    route = route or default_route(sys)
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}; choose from {ROUTES}")
    if route == "dlr":
        return realize_dlr(sys if isinstance(sys, PhDaeDLR) else ml_to_dlr(sys, tol=tol))
    ml = dlr_to_ml(sys, tol) if isinstance(sys, PhDaeDLR) else sys
    if route == "structured":
        return realize_ml_structured(ml, tol).descriptor()
    return realize_ml_annihilator(ml, tol)


def _storage_pair(sys):
    if isinstance(sys, StructuredRealization):
        return sys.P, sys.S
    if isinstance(sys, (PhDaeDLR, PhDaeML)):
        return sys.PS
    if isinstance(sys, LinearStructure):
        return lagrange_pair(sys)
    if isinstance(sys, tuple) and len(sys) == 2:
        return as_matrix(sys[0]), as_matrix(sys[1])
    raise TypeError(f"cannot read a Lagrange pair from {type(sys).__name__}")


def hamiltonian(sys, zvec):
    """Stored energy ``z^T S^T P z / 2``."""
    if isinstance(sys, DescriptorRealization):
        z = np.asarray(zvec, dtype=float)
        if z.shape[-1] != sys.n_z:
            raise DimensionError(f"z has length {z.shape[-1]}, expected {sys.n_z}")
        return float(sys.energy(z))
    P, S = _storage_pair(sys)
    z = np.asarray(zvec, dtype=float).ravel()
    if z.size != P.shape[1]:
        raise DimensionError(f"z has length {z.size}, expected {P.shape[1]}")
    return 0.5 * float(z @ (S.T @ P) @ z)


def hamiltonian_augmented(sr, zvec, lam):
    """Degenerate augmented energy; equals :func:`hamiltonian` for every ``lam``."""
    z = np.asarray(zvec, dtype=float).ravel()
    lam = np.asarray(lam, dtype=float).ravel()
    if z.size != sr.n or lam.size != sr.m:
        raise DimensionError("augmented state has wrong dimensions")
    x = np.concatenate([z, lam])
    return 0.5 * float(x @ (sr.S_a.T @ sr.P_a) @ x)


def admissible_set(real, tol=None):
    """Pointwise solution set over ``(zdot, z, f_P, e_P)``.

    Auxiliary states and their derivatives are projected out. The result is a
    :class:`LinearStructure` on the layout ``(("z", n_z), ("P", p))`` so that
    realizations of the same system can be compared with ``equals``.
    """
    tol = resolve_tol(tol)
    rows = real.relation_rows()
    nw, nz = real.n_states, real.n_z
    aux = np.concatenate([np.arange(nz, nw), nw + np.arange(nz, nw)])
    reduced = eliminate_variables(rows, aux, tol)
    p = real.n_inputs
    if real.n_outputs != p:
        raise DimensionError("admissible_set needs as many outputs as inputs")
    layout = PairingLayout((("z", nz), ("P", p))) if p else PairingLayout.single(nz, "z")
    return LinearStructure(layout, null_space(reduced, tol), tol)
