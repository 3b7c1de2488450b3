"""Random structures and systems for property tests and demos.

Every generator takes a ``numpy.random.Generator``. Structures are produced
from a canonical template and then scrambled by transformations that keep
the relevant pairing invariant: ``(f, e) -> (T f, T^{-T} e)`` preserves both
pairings, swapping ``f_i`` with ``e_i`` preserves the symmetric one, and the
shear ``f -> f + Sigma e`` (``Sigma`` symmetric) preserves the symplectic one.
"""
from __future__ import annotations

import numpy as np

from .linalg_core import null_space
from .phdae import (
    PhDaeDLR,
    PhDaeML,
    StructuredRealization,
    realize_dlr,
    realize_ml_structured,
)
from .structures import (
    LinearStructure,
    PairingLayout,
    graph_structure,
    lagrange_from_PS,
)

__all__ = [
    "random_orthonormal",
    "random_invertible",
    "random_pd",
    "random_monotone_map",
    "random_maximal_monotone",
    "random_dirac",
    "random_lagrange",
    "random_resistive",
    "random_dlr",
    "random_ml",
    "random_pd_ml",
    "random_pd_structured",
    "is_regular",
]


def random_orthonormal(rows, cols, rng):
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols))
    Q, _ = np.linalg.qr(rng.standard_normal((rows, cols)))
    return Q[:, :cols]


def random_invertible(n, rng, spread=4.0):
    """Well-conditioned random matrix; singular values in ``[1/spread, spread]``^(1/2)."""
    if n == 0:
        return np.zeros((0, 0))
    U = random_orthonormal(n, n, rng)
    V = random_orthonormal(n, n, rng)
    s = np.exp(rng.uniform(-0.5, 0.5, n) * np.log(spread))
    return U @ np.diag(s) @ V.T


def random_pd(n, rng, spread=4.0):
    if n == 0:
        return np.zeros((0, 0))
    U = random_orthonormal(n, n, rng)
    s = np.exp(rng.uniform(-0.5, 0.5, n) * np.log(spread))
    return U @ np.diag(s) @ U.T


def random_monotone_map(N, rng, kind="monotone", rank=None):
    """``-J + F F^T`` with ``J`` skew; ``rank`` bounds the symmetric part."""
    X = rng.standard_normal((N, N))
    J = 0.5 * (X - X.T)
    if rank is None:
        rank = int(rng.integers(0, N + 1)) if N else 0
    F = rng.standard_normal((N, rank)) / np.sqrt(max(rank, 1))
    R = F @ F.T
    if kind == "skew":
        return -J
    if kind == "symmetric":
        return R
    return -J + R


def _scramble(layout, V, rng, mix=True, swaps=True):
    """Apply a random pairing-preserving transformation to a basis over ``layout``."""
    N = layout.size
    fi, ei = layout.flow_index(), layout.effort_index()
    f, e = V[fi], V[ei]
    if swaps and N:
        mask = rng.random(N) < 0.3
        f, e = np.where(mask[:, None], e, f), np.where(mask[:, None], f, e)
    if mix and N:
        T = random_invertible(N, rng)
        f, e = T @ f, np.linalg.solve(T.T, e)
    out = np.zeros_like(V)
    out[fi], out[ei] = f, e
    return out


def _embedding_basis(layout, Mmap, G):
    """Image basis of ``{f = Mmap e - G lam, G^T e = 0}`` over a layout."""
    N = layout.size
    Z = null_space(G.T) if G.shape[1] else np.eye(N)
    k, m = Z.shape[1], G.shape[1]
    V = np.zeros((layout.ambient, k + m))
    V[layout.flow_index()] = np.hstack([Mmap @ Z, -G])
    V[layout.effort_index()] = np.hstack([Z, np.zeros((N, m))])
    return V


def random_maximal_monotone(layout, rng, m=None, kind="monotone", mix=True, swaps=True,
                            rank=None, tol=None):
    """Maximally monotone (or Dirac, ``kind="skew"``) structure over ``layout``.

    ``m`` is the number of multipliers of the canonical template.
    """
    N = layout.size
    if m is None:
        m = int(rng.integers(0, N + 1)) if N else 0
    Mmap = random_monotone_map(N, rng, kind, rank)
    G = random_orthonormal(N, m, rng)
    V = _scramble(layout, _embedding_basis(layout, Mmap, G), rng, mix, swaps)
    return LinearStructure(layout, V, tol)


def random_dirac(layout, rng, m=None, mix=True, swaps=True, tol=None):
    return random_maximal_monotone(layout, rng, m, kind="skew", mix=mix, swaps=swaps, tol=tol)


def _lagrange_pair(n, rng, nonneg, n_constraints):
    theta = rng.uniform(0.05, np.pi / 2 - 0.05, n) if nonneg else rng.uniform(0, np.pi, n)
    c, s = np.cos(theta), np.sin(theta)
    c[:n_constraints], s[:n_constraints] = 0.0, 1.0
    P, S = np.diag(c), np.diag(s)
    T = random_invertible(n, rng)
    P, S = T @ P, np.linalg.solve(T.T, S)
    if not nonneg:
        X = rng.standard_normal((n, n))
        P = P + 0.5 * (X + X.T) @ S
    Zt = random_invertible(n, rng)
    P, S = P @ Zt, S @ Zt
    return P, S


def random_lagrange(n, rng, nonneg=False, n_constraints=0, name="x", tol=None):
    """Lagrange structure ``im [P; S]``.

    ``n_constraints`` directions have zero flow, so ``P`` has that rank defect.
    """
    P, S = _lagrange_pair(n, rng, nonneg, n_constraints)
    return lagrange_from_PS(P, S, tol, name=name)


def random_resistive(r, rng, name="R", tol=None):
    """Nonnegative Lagrange structure on a single pair of dimension ``r``."""
    R = random_monotone_map(r, rng, "symmetric")
    if rng.random() < 0.5:
        return graph_structure(R, "symmetric", PairingLayout.single(r, name), tol)
    return random_lagrange(r, rng, nonneg=True, name=name, tol=tol)


def is_regular(real, rng=None, samples=3, cond_limit=1e9):
    """Whether ``sE - A`` is square and invertible at random complex points."""
    if not real.is_square:
        return False
    if real.n_states == 0:
        return True
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(samples):
        s = complex(*rng.uniform(0.5, 2.0, 2))
        if np.linalg.cond(s * real.E - real.A) > cond_limit:
            return False
    return True


def random_dlr(n, r, p, rng, regular=True, nonneg_storage=False, n_constraints=0,
               max_tries=200, tol=None, cond_limit=1e9):
    """Random (D, L, R) system; optionally rejection-sampled for a regular pencil.

    ``cond_limit`` bounds the condition number of ``sE - A`` at the sampled points.
    """
    layout = PairingLayout.standard(n, r, p)
    for _ in range(max_tries):
        D = random_dirac(layout, rng, tol=tol)
        L = random_lagrange(n, rng, nonneg=nonneg_storage, n_constraints=n_constraints, tol=tol)
        Rres = random_resistive(r, rng, tol=tol) if r else None
        sys = PhDaeDLR(D, L, Rres)
        if not regular or is_regular(realize_dlr(sys), rng, cond_limit=cond_limit):
            return sys
    raise RuntimeError("could not sample a regular (D, L, R) system")


def random_ml(n, p, rng, regular=True, nonneg_storage=False, n_constraints=0,
              max_tries=200, tol=None, cond_limit=1e9):
    """Random (M, L) system; optionally rejection-sampled for a regular pencil."""
    layout = PairingLayout.standard(n, 0, p)
    for _ in range(max_tries):
        M = random_maximal_monotone(layout, rng, tol=tol)
        L = random_lagrange(n, rng, nonneg=nonneg_storage, n_constraints=n_constraints, tol=tol)
        sys = PhDaeML(M, L)
        if not regular or is_regular(realize_ml_structured(sys, tol).descriptor(), rng,
                                     cond_limit=cond_limit):
            return sys
    raise RuntimeError("could not sample a regular (M, L) system")


def random_pd_ml(n, p, rng, m=None, max_tries=200, tol=None):
    """(M, L) system with ``L = graph(Q)``, ``Q`` positive definite, and no port multipliers.

    These satisfy every precondition of multiplier elimination.
    """
    layout = PairingLayout.standard(n, 0, p)
    N = n + p
    for _ in range(max_tries):
        mm = int(rng.integers(0, n)) if m is None and n else (m or 0)
        Mmap = random_monotone_map(N, rng)
        G = np.zeros((N, mm))
        G[:n] = random_orthonormal(n, mm, rng)
        M = LinearStructure(layout, _embedding_basis(layout, Mmap, G), tol)
        Q = random_pd(n, rng)
        L = lagrange_from_PS(np.eye(n), Q, tol)
        sys = PhDaeML(M, L)
        if is_regular(realize_ml_structured(sys, tol).descriptor(), rng):
            return sys
    raise RuntimeError("could not sample a regular positive definite system")


def random_pd_structured(n, p, rng, m=None, P=None):
    """Structured realization with ``S P^{-1}`` positive definite and ``G_P = 0``.

    ``G`` is a random full-column-rank matrix (not orthonormalized); the
    monotone blocks come from one random monotone map on ``(e, e_P)``.
    """
    if m is None:
        m = int(rng.integers(0, n)) if n else 0
    Mm = random_monotone_map(n + p, rng)
    Mee, MeP, MPe, MPP = Mm[:n, :n], Mm[:n, n:], Mm[n:, :n], Mm[n:, n:]
    Q = random_pd(n, rng)
    P = np.eye(n) if P is None else np.asarray(P, dtype=float)
    return StructuredRealization(
        P=P, S=Q @ P,
        J=0.5 * (Mee.T - Mee), R=0.5 * (Mee + Mee.T),
        B=0.5 * (MPe.T - MeP), V=0.5 * (MeP + MPe.T),
        N=0.5 * (MPP - MPP.T), W=0.5 * (MPP + MPP.T),
        G=random_invertible(n, rng)[:, :m] if m else np.zeros((n, 0)),
        G_P=np.zeros((p, m)),
    )
