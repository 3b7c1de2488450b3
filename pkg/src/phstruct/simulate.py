"""Fixed-step integration of descriptor realizations with an energy audit."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import InconsistentInput, InfeasibleConstraints, SingularStepPencil
from .linalg_core import as_matrix, resolve_tol

__all__ = [
    "METHODS",
    "Scenario",
    "InitResult",
    "Trajectory",
    "EnergyAudit",
    "consistent_init",
    "integrate",
    "energy_audit",
    "write_trajectory_csv",
]

METHODS = ("implicit_midpoint", "implicit_euler")
PENCIL_COND_LIMIT = 1e12


@dataclass(frozen=True)
class Scenario:
    """Input signal, time grid and initial guess for one simulation run.

    The input is piecewise linear through ``(input_times, input_values)`` and
    held constant outside the sample range. A repeated time denotes a jump.
    With ``hold_z`` the initial correction moves only auxiliary states when
    that suffices.
    """

    realization: object
    h: float
    t_end: float
    input_times: np.ndarray | None = None
    input_values: np.ndarray | None = None
    initial_guess: np.ndarray | None = None
    t0: float = 0.0
    method: str = "implicit_midpoint"
    hold_z: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise ValueError(f"step size must be positive, got {self.h}")
        if not self.t_end > self.t0:
            raise ValueError("t_end must exceed t0")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        p = self.realization.n_inputs
        if self.input_times is None:
            times, values = np.array([self.t0]), np.zeros((1, p))
        else:
            times = np.asarray(self.input_times, dtype=float).ravel()
            values = as_matrix(self.input_values, name="input_values")
            if p == 1 and values.shape == (1, times.size) and times.size != 1:
                values = values.T
            if values.shape != (times.size, p):
                raise ValueError(
                    f"input_values must be {times.size} x {p}, got {values.shape}")
            if times.size == 0 or np.any(np.diff(times) < 0):
                raise ValueError("input_times must be nonempty and sorted")
        object.__setattr__(self, "input_times", times)
        object.__setattr__(self, "input_values", values)
        nw = self.realization.n_states
        guess = np.zeros(nw) if self.initial_guess is None else np.asarray(
            self.initial_guess, dtype=float).ravel()
        if guess.size != nw:
            raise ValueError(f"initial guess has length {guess.size}, expected {nw}")
        object.__setattr__(self, "initial_guess", guess)

    @property
    def n_steps(self):
        return max(1, int(round((self.t_end - self.t0) / self.h)))

    @property
    def grid(self):
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    def input_at(self, t, side="right"):
        """Input value at ``t``; ``side`` picks the one-sided limit at a jump."""
        times, values = self.input_times, self.input_values
        idx = int(np.searchsorted(times, t, side=side))
        if idx == 0:
            return values[0].copy()
        if idx == times.size:
            return values[-1].copy()
        t0, t1 = times[idx - 1], times[idx]
        if t1 == t0:
            return values[idx].copy() if side == "left" else values[idx - 1].copy()
        a = (t - t0) / (t1 - t0)
        return (1 - a) * values[idx - 1] + a * values[idx]


@dataclass(frozen=True)
class InitResult:
    state: np.ndarray
    correction_norm: float
    residual: float


def consistent_init(real, guess, u0=None, tol=None, free=None):
    """Smallest correction of ``guess`` that satisfies the algebraic rows at ``u0``.

    The algebraic rows are ``N (A w + B_in u0) = 0`` with ``N E = 0``. If
    ``free`` lists state indices, only those are corrected when possible;
    otherwise (or if that is infeasible) all states are.

    Raises
    ------
    InfeasibleConstraints
        If no state satisfies the constraints for this input.
    """
    tol = resolve_tol(tol)
    guess = np.asarray(guess, dtype=float).ravel()
    u0 = np.zeros(real.n_inputs) if u0 is None else np.asarray(u0, dtype=float).ravel()
    N = real.algebraic_rows(tol)
    if N.shape[0] == 0:
        return InitResult(guess.copy(), 0.0, 0.0)
    C = N @ real.A
    d = -N @ (real.B_in @ u0)

    def correct(cols):
        delta = np.zeros_like(guess)
        delta[cols] = np.linalg.lstsq(C[:, cols], d - C @ guess, rcond=None)[0]
        state = guess + delta
        residual = float(np.linalg.norm(C @ state - d))
        scale = max(np.linalg.norm(C, 2) * np.linalg.norm(state), np.linalg.norm(d), 1.0)
        return state, delta, residual, residual <= tol.sub * scale

    everything = np.arange(guess.size)
    state, delta, residual, ok = correct(everything if free is None else np.asarray(free, int))
    if not ok and free is not None:
        state, delta, residual, ok = correct(everything)
    if not ok:
        raise InfeasibleConstraints(
            f"algebraic constraints cannot be met at the initial input (residual {residual:.3e})")
    return InitResult(state, float(np.linalg.norm(delta)), residual)


@dataclass(frozen=True)
class Trajectory:
    """Grid values of a simulation run.

    ``w`` holds the states at grid points and ``u`` the input used there.
    Step quantities have one entry fewer than the grid and are taken where
    the method enforces the relation: at the step midpoint for the midpoint
    rule (``u_step`` is the average of the one-sided endpoint inputs), at the
    right endpoint for implicit Euler. Under the midpoint rule, multipliers
    without their own algebraic row are only meaningful at midpoints; use
    ``w_step`` for them.
    """

    realization: object
    method: str
    h: float
    t: np.ndarray
    w: np.ndarray
    u: np.ndarray
    u_step: np.ndarray
    init_correction: float = 0.0

    @property
    def z(self):
        return self.w[:, :self.realization.n_z]

    @property
    def w_mid(self):
        return 0.5 * (self.w[:-1] + self.w[1:])

    @property
    def w_step(self):
        return self.w_mid if self.method == "implicit_midpoint" else self.w[1:]

    @property
    def v(self):
        return np.diff(self.w, axis=0) / self.h

    @property
    def y(self):
        r = self.realization
        return self.w @ r.C_out.T + self.u @ r.D_out.T

    @property
    def y_step(self):
        r = self.realization
        return self.w_step @ r.C_out.T + self.u_step @ r.D_out.T

    @property
    def H(self):
        return self.realization.energy(self.w)

    @property
    def dissipation(self):
        r = self.realization
        x = np.hstack([self.v, self.w_step, self.u_step])
        return np.einsum("ki,ij,kj->k", x, r.dissipation_form, x)

    @property
    def supplied_power(self):
        return np.einsum("ki,ki->k", self.u_step, self.y_step)

    @property
    def residual(self):
        """Per-step balance defect; round-off for the midpoint rule, and the
        (nonpositive, for nonnegative storage) numerical dissipation
        ``-dz^T S^T P dz / (2h)`` for implicit Euler."""
        return np.diff(self.H) / self.h + self.dissipation - self.supplied_power


def _step_matrices(real, h, method):
    E, A = real.E, real.A
    if E.shape[0] != E.shape[1]:
        raise SingularStepPencil(
            f"realization has {E.shape[0]} rows for {E.shape[1]} states; "
            "simulation needs a square pencil")
    pencil = 2.0 * E / h - A if method == "implicit_midpoint" else E - h * A
    if pencil.size:
        cond = np.linalg.cond(pencil)
        if not np.isfinite(cond) or cond > PENCIL_COND_LIMIT:
            raise SingularStepPencil(
                f"step pencil is singular or ill-conditioned (cond {cond:.3e}) at h = {h}; "
                "try a different step size")
    return sla.lu_factor(pencil) if pencil.size else None


def integrate(scenario, method=None, tol=None):
    """Run the scenario; one LU factorization, one triangular solve per step.

    ``implicit_midpoint`` solves ``(2E/h - A) w_mid = 2E w_k / h + B u_mid`` and
    sets ``w_{k+1} = 2 w_mid - w_k``; ``implicit_euler`` solves
    ``(E - hA) w_{k+1} = E w_k + h B u_{k+1}``.

    Raises
    ------
    SingularStepPencil
        If the step pencil cannot be factored reliably.
    InconsistentInput
        If the input jumps at a grid point in a direction that violates the
        algebraic rows.
    InfeasibleConstraints
        From :func:`consistent_init`.
    """
    tol = resolve_tol(tol)
    method = method or scenario.method
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    real, h = scenario.realization, scenario.h
    lu = _step_matrices(real, h, method)
    t = scenario.grid
    K = t.size - 1
    p = real.n_inputs
    u_right = np.array([scenario.input_at(tk, "right") for tk in t]).reshape(K + 1, p)
    u_left = np.array([scenario.input_at(tk, "left") for tk in t]).reshape(K + 1, p)
    N = real.algebraic_rows(tol)
    if N.shape[0] and p:
        jump = (u_right - u_left)[1:-1] @ (N @ real.B_in).T
        bad = np.flatnonzero(np.linalg.norm(jump, axis=1) > tol.sub * max(1.0, np.abs(u_right).max()))
        if bad.size:
            k = bad[0] + 1
            raise InconsistentInput(
                f"input jump at t = {t[k]:.6g} violates the algebraic constraints")
    free = np.arange(real.n_z, real.n_states) if scenario.hold_z else None
    init = consistent_init(real, scenario.initial_guess, u_right[0], tol, free)
    nw = real.n_states
    w = np.zeros((K + 1, nw))
    w[0] = init.state
    E, B = real.E, real.B_in
    u_mid = 0.5 * (u_right[:-1] + u_left[1:])
    for k in range(K):
        if lu is None:
            break
        if method == "implicit_midpoint":
            rhs = 2.0 * E @ w[k] / h + B @ u_mid[k]
            w[k + 1] = 2.0 * sla.lu_solve(lu, rhs) - w[k]
        else:
            rhs = E @ w[k] + h * B @ u_left[k + 1]
            w[k + 1] = sla.lu_solve(lu, rhs)
    u_grid = u_left.copy()
    u_grid[0] = u_right[0]
    u_step = u_mid if method == "implicit_midpoint" else u_left[1:]
    return Trajectory(real, method, h, t, w, u_grid, u_step, init.correction_norm)


@dataclass(frozen=True)
class EnergyAudit:
    residual: np.ndarray
    max_residual: float
    dissipation: np.ndarray
    supplied: np.ndarray
    energy_change: np.ndarray
    passive: bool
    worst_step: int
    tolerance: float

    def summary(self):
        verdict = "pass" if self.passive else f"fail (step {self.worst_step})"
        return (f"max balance residual {self.max_residual:.3e}; "
                f"passivity {verdict}")


def energy_audit(traj, tol=1e-10):
    """Check the discrete power balance and the passivity inequality per step.

    ``residual[k] = (H_{k+1} - H_k)/h + dissipation - u^T y`` with step
    quantities as in :class:`Trajectory`; the step is passive if
    ``H_{k+1} - H_k <= h u^T y + tol``.
    """
    H = traj.H
    dH = np.diff(H)
    supplied = traj.h * traj.supplied_power
    slack = dH - supplied
    res = traj.residual
    worst = int(np.argmax(slack)) if slack.size else -1
    return EnergyAudit(
        residual=res,
        max_residual=float(np.max(np.abs(res))) if res.size else 0.0,
        dissipation=traj.dissipation,
        supplied=supplied,
        energy_change=dH,
        passive=bool(np.all(slack <= tol)),
        worst_step=worst,
        tolerance=tol,
    )


def _fmt(x):
    return f"{x:.17g}"


def write_trajectory_csv(traj, out, header_line=None):
    """Write one row per grid point.

    Columns: ``t``, the state labels, outputs not already among the states,
    inputs, ``H`` and the residual of the step ending at that row (``nan``
    on the first row).
    """
    r = traj.realization
    extra_out = [i for i, lab in enumerate(r.output_labels) if lab not in r.state_labels]
    header = (["t", *r.state_labels, *(r.output_labels[i] for i in extra_out),
               *r.input_labels, "H", "residual"])
    y, H = traj.y, traj.H
    res = np.concatenate([[np.nan], traj.residual])
    own = isinstance(out, (str, bytes)) or hasattr(out, "__fspath__")
    fh = open(out, "w", newline="") if own else out
    try:
        if header_line:
            fh.write(f"# {header_line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k in range(traj.t.size):
            row = [traj.t[k], *traj.w[k], *y[k, extra_out], *traj.u[k], H[k], res[k]]
            writer.writerow([_fmt(x) for x in row])
    finally:
        if own:
            fh.close()
