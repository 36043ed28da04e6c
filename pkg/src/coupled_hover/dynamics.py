"""Rigid-body vector field, Lie-group-aware fixed-step integrator, rollout.

States are stacked: position/velocity/rate arrays have shape (..., 3)
and rotations (..., 3, 3), so a batch of trajectories integrates in one
pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteState
from .platform import Platform
from .so3 import exp_so3, orthonormality_residual, project_to_so3, rotate

ORTHONORMALITY_TOL = 1e-9
DEFAULT_STEP = 1e-3


@dataclass
class BodyState:
    """Position, velocity, attitude, and body angular velocity."""

    p: np.ndarray
    v: np.ndarray
    R: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.Omega = np.asarray(self.Omega, dtype=float)

    @property
    def batch_shape(self) -> tuple:
        return self.p.shape[:-1]

    def copy(self) -> "BodyState":
        return BodyState(self.p.copy(), self.v.copy(), self.R.copy(), self.Omega.copy())

    def select(self, idx) -> "BodyState":
        return BodyState(self.p[idx], self.v[idx], self.R[idx], self.Omega[idx])

    def is_finite(self) -> np.ndarray:
        ok = np.isfinite(self.p).all(axis=-1)
        ok &= np.isfinite(self.v).all(axis=-1)
        ok &= np.isfinite(self.R).all(axis=(-2, -1))
        ok &= np.isfinite(self.Omega).all(axis=-1)
        return ok


@dataclass
class ControlInput:
    """Scalar force input and the 3-vector moment input."""

    u_f: np.ndarray
    u_tau: np.ndarray

    def __post_init__(self):
        self.u_f = np.asarray(self.u_f, dtype=float)
        self.u_tau = np.asarray(self.u_tau, dtype=float)

    @staticmethod
    def zero(batch_shape=()) -> "ControlInput":
        return ControlInput(np.zeros(batch_shape), np.zeros(batch_shape + (3,)))


@dataclass
class Derivative:
    """Tangent of BodyState; the rotation slot carries the body rate."""

    p_dot: np.ndarray
    v_dot: np.ndarray
    body_rate: np.ndarray
    Omega_dot: np.ndarray


def state_derivative(platform: Platform, state: BodyState, u: ControlInput) -> Derivative:
    """Newton-Euler right-hand side at the given state and input."""
    m = platform.mass
    A = platform.force_alloc
    B = platform.spurious_alloc
    C = platform.moment_alloc
    J = platform.inertia

    u_f = np.asarray(u.u_f, dtype=float)
    body_force = np.einsum("ij,...j->...i", A, u_f[..., None] if A.shape[1] == 1 else u_f)
    body_force = body_force + np.einsum("ij,...j->...i", B, u.u_tau)
    gravity = np.zeros_like(state.v)
    gravity[..., 2] = -platform.gravity
    v_dot = gravity + rotate(state.R, body_force) / m

    JO = np.einsum("ij,...j->...i", J, state.Omega)
    torque = np.einsum("ij,...j->...i", C, u.u_tau) - np.cross(state.Omega, JO)
    Omega_dot = np.einsum("ij,...j->...i", platform.inertia_inv, torque)
    return Derivative(p_dot=state.v, v_dot=v_dot, body_rate=state.Omega, Omega_dot=Omega_dot)


def step(platform: Platform, state: BodyState, u: ControlInput, h: float) -> BodyState:
    """One classic RK4 step with a multiplicative rotation update.

    (p, v, Omega) follow the standard four-stage combination; the
    rotation advances by exp of the RK4-weighted body rate, with stage
    rotations rebuilt from the running rate estimates.  Orthonormality
    is restored by polar projection when the drift exceeds tolerance.
    """
    if h <= 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    return rk4_advance(platform, state, u, h)


def rk4_advance(platform: Platform, state: BodyState, u: ControlInput, h: float) -> BodyState:
    """RK4 advance by a signed duration h (negative integrates backward)."""

    def deriv(p, v, R, Omega):
        st = BodyState(p, v, R, Omega)
        d = state_derivative(platform, st, u)
        return d.v_dot, d.Omega_dot

    p0, v0, R0, O0 = state.p, state.v, state.R, state.Omega

    a1, w1 = deriv(p0, v0, R0, O0)
    v2 = v0 + 0.5 * h * a1
    O2 = O0 + 0.5 * h * w1
    R2 = R0 @ exp_so3(0.5 * h * O0)
    a2, w2 = deriv(p0 + 0.5 * h * v0, v2, R2, O2)
    v3 = v0 + 0.5 * h * a2
    O3 = O0 + 0.5 * h * w2
    R3 = R0 @ exp_so3(0.5 * h * O2)
    a3, w3 = deriv(p0 + 0.5 * h * v2, v3, R3, O3)
    v4 = v0 + h * a3
    O4 = O0 + h * w3
    R4 = R0 @ exp_so3(h * O3)
    a4, w4 = deriv(p0 + h * v3, v4, R4, O4)

    p_new = p0 + h / 6.0 * (v0 + 2.0 * v2 + 2.0 * v3 + v4)
    v_new = v0 + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    O_new = O0 + h / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
    rate_eff = (O0 + 2.0 * O2 + 2.0 * O3 + O4) / 6.0
    R_new = R0 @ exp_so3(h * rate_eff)

    drift = orthonormality_residual(R_new)
    if np.any(drift > ORTHONORMALITY_TOL):
        R_new = project_to_so3(R_new)

    out = BodyState(p_new, v_new, R_new, O_new)
    finite = out.is_finite()
    if not np.all(finite):
        bad = np.argwhere(~np.atleast_1d(finite)).ravel().tolist()
        raise NonFiniteState("integrator produced non-finite state", batch_index=bad)
    return out


@dataclass
class Trajectory:
    """Uniformly sampled rollout with per-sample inputs and diagnostics."""

    t: np.ndarray           # (K,)
    p: np.ndarray           # (K, ..., 3)
    v: np.ndarray
    R: np.ndarray           # (K, ..., 3, 3)
    Omega: np.ndarray
    u_f: np.ndarray         # (K, ...)
    u_tau: np.ndarray       # (K, ..., 3)
    diagnostics: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self) > 1 else 0.0

    def state_at(self, k: int) -> BodyState:
        return BodyState(self.p[k], self.v[k], self.R[k], self.Omega[k])


def rollout(platform: Platform, x0: BodyState, controller, h: float, T: float,
            record: str | bool = "full") -> Trajectory:
    """Integrate the closed loop with a zero-order-hold controller.

    The controller is called once per step with (t, state) and must
    return a ControlInput or (ControlInput, diagnostics-dict).  Errors
    from the controller or integrator propagate with the failing time
    attached.

    record: "full" keeps every sample, "diag" keeps per-step diagnostics
    but only the final state (memory-lean batched campaigns), "final"
    keeps just the last sample.  Booleans map to "full"/"final".
    """
    if record is True:
        record = "full"
    elif record is False:
        record = "final"
    if record not in ("full", "diag", "final"):
        raise ValueError(f"unknown record mode {record!r}")
    if h <= 0.0 or T < h:
        raise ValueError(f"need T >= h > 0, got h={h}, T={T}")
    n_steps = int(np.floor(T / h + 1e-9))
    state = x0.copy()

    ts, ps, vs, Rs, Os, ufs, utaus = [], [], [], [], [], [], []
    diag_series: dict[str, list] = {}

    def eval_controller(t, st):
        try:
            out = controller(t, st)
        except Exception as exc:
            if isinstance(exc, NonFiniteState):
                exc.t = t
            raise
        if isinstance(out, tuple):
            return out
        return out, {}

    for k in range(n_steps + 1):
        t = k * h
        u, diag = eval_controller(t, state)
        keep_state = record == "full" or k == n_steps
        if keep_state:
            ps.append(state.p.copy())
            vs.append(state.v.copy())
            Rs.append(state.R.copy())
            Os.append(state.Omega.copy())
            ufs.append(np.asarray(u.u_f, dtype=float).copy())
            utaus.append(np.asarray(u.u_tau, dtype=float).copy())
        if record != "final" or k == n_steps:
            ts.append(t)
            for name, value in diag.items():
                diag_series.setdefault(name, []).append(np.asarray(value, dtype=float).copy())
        if k < n_steps:
            try:
                state = step(platform, state, u, h)
            except NonFiniteState as exc:
                exc.t = (k + 1) * h
                raise

    return Trajectory(
        t=np.asarray(ts),
        p=np.stack(ps), v=np.stack(vs), R=np.stack(Rs), Omega=np.stack(Os),
        u_f=np.stack(ufs), u_tau=np.stack(utaus),
        diagnostics={k: np.stack(v) for k, v in diag_series.items()},
    )
