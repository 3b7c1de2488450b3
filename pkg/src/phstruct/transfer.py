"""Multiplier elimination, transfer functions and sampled positive realness."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import PreconditionFailed, SingularResolvent
from .linalg_core import null_space, numerical_rank, psd_cone_check, resolve_tol
from .phdae import (
    DescriptorRealization,
    PhDaeDLR,
    PhDaeML,
    StructuredRealization,
    realize_dlr,
    realize_ml_structured,
)

__all__ = [
    "ExplicitSystem",
    "PositiveRealVerdict",
    "eliminate_multipliers",
    "transfer_eval",
    "positive_real_sample_check",
    "right_half_plane_grid",
    "write_transfer_csv",
]

RESOLVENT_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ExplicitSystem:
    """``xdot = A x + B u``, ``y = C x + D u`` on ``x = P z``.

    ``Pi`` projects onto ``ker(G^T Q)`` along ``im G``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Pi: np.ndarray
    Q: np.ndarray
    G: np.ndarray

    def projection_residuals(self):
        """Norms of ``Pi^2 - Pi``, ``Pi G`` and ``G^T Q Pi``."""
        Pi, G, Q = self.Pi, self.G, self.Q
        return {
            "idempotent": float(np.linalg.norm(Pi @ Pi - Pi)),
            "Pi_G": float(np.linalg.norm(Pi @ G)),
            "GtQ_Pi": float(np.linalg.norm(G.T @ Q @ Pi)),
        }

    def invariance_residual(self, tol=None):
        """Norm of ``G^T Q A Z`` for an orthonormal basis ``Z`` of ``ker(G^T Q)``."""
        Z = null_space(self.G.T @ self.Q, tol)
        if Z.size == 0 or self.G.size == 0:
            return 0.0
        return float(np.linalg.norm(self.G.T @ self.Q @ self.A @ Z))


def eliminate_multipliers(sr, tol=None):
    """Solve the constraint for the multiplier and return the explicit system.

    With ``Q = S P^{-1}`` the constraint ``G^T Q x = 0`` fixes
    ``lam = -(G^T Q G)^{-1} G^T Q ((J - R) Q x + (B - V) u)``.

    Raises
    ------
    PreconditionFailed
        ``condition`` is one of ``G_P_zero``, ``Q_invertible``,
        ``G_full_rank``, ``GQG_invertible``.
    """
    tol = resolve_tol(tol)
    gp = float(np.linalg.norm(sr.G_P)) if sr.G_P.size else 0.0
    if gp > tol.sub:
        raise PreconditionFailed(
            "G_P_zero",
            "port efforts enter the constraints (G_P != 0); eliminating the multiplier "
            "would need a state-space extension, which is not supported. "
            "Use the descriptor route instead.",
            residual=gp,
        )
    n = sr.n
    P, S = sr.P, sr.S
    if numerical_rank(P, tol) < n:
        raise PreconditionFailed(
            "Q_invertible", "P is singular, so L is not the graph of a map Q",
            residual=float(np.linalg.svd(P, compute_uv=False)[-1]) if n else 0.0)
    Q = S @ np.linalg.inv(P)
    Q = 0.5 * (Q + Q.T)
    if numerical_rank(Q, tol) < n:
        raise PreconditionFailed(
            "Q_invertible", "Q = S P^{-1} is singular",
            residual=float(np.linalg.svd(Q, compute_uv=False)[-1]))
    G = sr.G
    m = G.shape[1]
    if numerical_rank(G, tol) < m:
        raise PreconditionFailed("G_full_rank", "G does not have full column rank",
                                 residual=float(m - numerical_rank(G, tol)))
    GQG = G.T @ Q @ G
    if m and numerical_rank(GQG, tol) < m:
        raise PreconditionFailed(
            "GQG_invertible", "G^T Q G is singular",
            residual=float(np.linalg.svd(GQG, compute_uv=False)[-1]))
    Pi = np.eye(n) - (G @ np.linalg.solve(GQG, G.T @ Q) if m else 0.0)
    return ExplicitSystem(
        A=Pi @ (sr.J - sr.R) @ Q,
        B=Pi @ (sr.B - sr.V),
        C=(sr.B + sr.V).T @ Q,
        D=sr.N + sr.W,
        Pi=Pi, Q=Q, G=G,
    )


def _solve_resolvent(M, rhs, s):
    if M.size == 0:
        return np.zeros((0, rhs.shape[1]), dtype=complex)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > RESOLVENT_COND_LIMIT:
        raise SingularResolvent(f"resolvent is singular at s = {s} (cond {cond:.3e})")
    return np.linalg.solve(M, rhs)


def _as_descriptor(sys):
    if isinstance(sys, DescriptorRealization):
        return sys
    if isinstance(sys, StructuredRealization):
        return sys.descriptor()
    if isinstance(sys, PhDaeML):
        return realize_ml_structured(sys).descriptor()
    if isinstance(sys, PhDaeDLR):
        return realize_dlr(sys)
    raise TypeError(f"no descriptor realization for {type(sys).__name__}")


def transfer_eval(sys, s, route=None):
    """Evaluate the transfer matrix at a complex point.

    ``route`` is ``"explicit"`` (``C (sI - A)^{-1} B + D``, requires an
    :class:`ExplicitSystem` or a structured realization that admits
    elimination) or ``"descriptor"`` (``C (sE - A)^{-1} B + D``). The default
    is explicit for :class:`ExplicitSystem` and descriptor otherwise.
    """
    s = complex(s)
    if route is None:
        route = "explicit" if isinstance(sys, ExplicitSystem) else "descriptor"
    if route == "explicit":
        ex = sys if isinstance(sys, ExplicitSystem) else eliminate_multipliers(sys)
        n = ex.A.shape[0]
        X = _solve_resolvent(s * np.eye(n) - ex.A, ex.B.astype(complex), s)
        return ex.C @ X + ex.D
    if route != "descriptor":
        raise ValueError(f"unknown route {route!r}")
    if isinstance(sys, ExplicitSystem):
        n = sys.A.shape[0]
        E, A, B, C, D = np.eye(n), sys.A, sys.B, sys.C, sys.D
    else:
        real = _as_descriptor(sys)
        if not real.is_square:
            raise SingularResolvent("descriptor realization is not square")
        E, A, B, C, D = real.E, real.A, real.B_in, real.C_out, real.D_out
    X = _solve_resolvent(s * E - A, B.astype(complex), s)
    return C @ X + D


@dataclass(frozen=True)
class PositiveRealVerdict:
    """Outcome of a sampled check; passing is necessary, not sufficient."""

    passed: bool
    n_samples: int
    min_eig: float
    failures: list = field(default_factory=list)
    exhaustive: bool = False

    def summary(self):
        head = "pass" if self.passed else f"fail at {len(self.failures)} of {self.n_samples} samples"
        return (f"positive-real sample check: {head} "
                f"(min eigenvalue of H + H* = {self.min_eig:.3e}; sampled, non-exhaustive)")


def _storage_matrix(sys, tol):
    if isinstance(sys, ExplicitSystem):
        return sys.Q
    if isinstance(sys, StructuredRealization):
        if numerical_rank(sys.P, tol) == sys.n:
            Q = sys.S @ np.linalg.inv(sys.P)
            return 0.5 * (Q + Q.T)
        return 0.5 * (sys.S.T @ sys.P + sys.P.T @ sys.S)
    return _as_descriptor(sys).hamiltonian_form


def positive_real_sample_check(sys, samples, tol=None, check_storage=True):
    """Test ``H(s) + H(s)^* >= -tol.psd`` at each sample in the open right half-plane.

    With ``check_storage`` the energy matrix must be positive definite, else
    :class:`PreconditionFailed` is raised. Failing samples are reported with
    an eigenvector witness.
    """
    tol = resolve_tol(tol)
    samples = np.atleast_1d(np.asarray(samples, dtype=complex))
    if samples.size == 0:
        raise ValueError("need at least one sample")
    if np.any(samples.real <= 0):
        raise ValueError("samples must lie in the open right half-plane")
    if check_storage:
        Qs = _storage_matrix(sys, tol)
        verdict = psd_cone_check(Qs, tol)
        rank = numerical_rank(Qs, tol)
        if not verdict.psd or rank < Qs.shape[0]:
            raise PreconditionFailed(
                "Q_positive_definite", "energy matrix is not positive definite",
                residual=-verdict.min_eig if not verdict.psd else float(Qs.shape[0] - rank),
                witness=verdict.witness)
    failures = []
    min_eig = np.inf
    for s in samples:
        H = transfer_eval(sys, s)
        w, V = np.linalg.eigh(H + H.conj().T)
        if w.size == 0:
            continue
        min_eig = min(min_eig, float(w[0]))
        if w[0] < -tol.psd:
            failures.append({"s": complex(s), "min_eig": float(w[0]), "witness": V[:, 0].copy()})
    min_eig = 0.0 if min_eig == np.inf else min_eig
    return PositiveRealVerdict(not failures, int(samples.size), min_eig, failures)


def right_half_plane_grid(re=(0.01, 0.1, 1.0, 10.0, 100.0), im=None):
    """Cartesian grid of sample points; default is 5 x 10 = 50 points."""
    if im is None:
        im = np.linspace(-10.0, 10.0, 10)
    re, im = np.asarray(re, dtype=float), np.asarray(im, dtype=float)
    return (re[:, None] + 1j * im[None, :]).ravel()


def write_transfer_csv(samples, values, out, magnitude_phase=False, header_line=None):
    """One row per sample: ``re_s, im_s`` then real/imaginary parts per entry."""
    values = [np.atleast_2d(v) for v in values]
    rows, cols = values[0].shape if values else (0, 0)
    header = ["re_s", "im_s"]
    for i in range(rows):
        for j in range(cols):
            tag = f"H{i + 1}{j + 1}"
            header += [f"re_{tag}", f"im_{tag}"]
            if magnitude_phase:
                header += [f"abs_{tag}", f"arg_{tag}"]
    own = isinstance(out, (str, bytes)) or hasattr(out, "__fspath__")
    fh = open(out, "w", newline="") if own else out
    try:
        if header_line:
            fh.write(f"# {header_line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for s, H in zip(samples, values):
            row = [s.real, s.imag]
            for h in H.ravel():
                row += [h.real, h.imag]
                if magnitude_phase:
                    row += [abs(h), np.angle(h)]
            writer.writerow([f"{x:.17g}" for x in row])
    finally:
        if own:
            fh.close()
