"""Hierarchical hovering controller and closed-loop error dynamics.

Layers: a position loop produces the reference force, an attitude
construction aligns the preferential direction with it, an attitude
loop produces the reference moment, and a wrench mapper projects both
onto the actual inputs.  All evaluations are pure functions of the
state; everything accepts stacked inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificate import DomainBounds, GainSet, lyapunov_value
from .dynamics import BodyState, ControlInput, state_derivative
from .errors import HeadingSingular, IllConditionedC, ThrustDegenerate
from .platform import Platform, preferential_direction
from .so3 import attitude_error, exp_so3, psi, rotate, rotate_t, transport_matrix

E3 = np.array([0.0, 0.0, 1.0])
AXIS_GUARD = 1e-6        # reject when 1 - (r1 . w3)^2 falls below this
THRUST_FLOOR_FRACTION = 0.1  # f_min = fraction * m * g
COND_LIMIT = 1e8


@dataclass(frozen=True)
class Reference:
    """Constant position setpoint and heading rotation."""

    p_r: np.ndarray
    R_r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_r", np.asarray(self.p_r, dtype=float))
        object.__setattr__(self, "R_r", np.asarray(self.R_r, dtype=float))

    @property
    def heading(self) -> np.ndarray:
        return self.R_r[:, 0]


def reference_force(gains: GainSet, platform: Platform, state: BodyState, ref: Reference) -> np.ndarray:
    """Force request m*g*e3 - k_p*e_p - k_v*v."""
    e_p = state.p - ref.p_r
    out = -gains.k_p * e_p - gains.k_v * state.v
    out[..., 2] += platform.weight
    return out


def minimal_rotation_to_e3(d_star: np.ndarray) -> np.ndarray:
    """Smallest rotation mapping d_star onto e3.

    Aligned input gives the identity; the antipodal input rotates by pi
    about e1.
    """
    d = np.asarray(d_star, dtype=float)
    axis = np.cross(d, E3)
    s = np.linalg.norm(axis)
    c = float(d @ E3)
    if s < 1e-12:
        if c > 0.0:
            return np.eye(3)
        return exp_so3(np.pi * np.array([1.0, 0.0, 0.0]))
    return exp_so3(axis / s * np.arctan2(s, c))


def desired_attitude(
    f_r: np.ndarray,
    heading: np.ndarray,
    R_b: np.ndarray,
    f_min: float,
    delta: float = 1.0 - 1e-9,
):
    """Desired rotation aligning the preferential direction with f_r.

    Returns (R_d, R_w, w3, fnorm, align).  The world part R_w carries
    f_r/|f_r| in its third column and the projected heading in its
    first; R_b moves the preferential direction to e3 beforehand.
    """
    f_r = np.asarray(f_r, dtype=float)
    fnorm = np.linalg.norm(f_r, axis=-1)
    if np.any(fnorm < f_min):
        bad = np.argwhere(np.atleast_1d(fnorm < f_min)).ravel().tolist()
        raise ThrustDegenerate(f"|f_r| below floor {f_min:.4g} at indices {bad}")
    w3 = f_r / fnorm[..., None]
    align = np.einsum("...i,i->...", w3, heading)
    n2 = 1.0 - align * align
    if np.any(np.abs(align) > delta) or np.any(n2 < AXIS_GUARD):
        bad = np.argwhere(np.atleast_1d((np.abs(align) > delta) | (n2 < AXIS_GUARD))).ravel().tolist()
        raise HeadingSingular(f"thrust direction too close to the heading axis at indices {bad}")
    w2 = np.cross(w3, np.broadcast_to(heading, w3.shape)) / np.sqrt(n2)[..., None]
    w1 = np.cross(w2, w3)
    R_w = np.stack([w1, w2, w3], axis=-1)
    R_d = R_w @ R_b
    return R_d, R_w, w3, fnorm, align


def reference_moment(gains: GainSet, platform: Platform, state: BodyState, R_d: np.ndarray) -> np.ndarray:
    """Moment request Omega x J Omega - k_R e_R - k_Omega Omega."""
    JO = np.einsum("ij,...j->...i", platform.inertia, state.Omega)
    e_R = attitude_error(state.R, R_d)
    return np.cross(state.Omega, JO) - gains.k_R * e_R - gains.k_Omega * state.Omega


def wrench_map(platform: Platform, R: np.ndarray, f_r: np.ndarray, tau_r: np.ndarray) -> ControlInput:
    """Exact moment inversion plus least-squares scalar force.

    u_tau solves C u_tau = tau_r; u_f minimizes |R a xi - (f_r - R B
    u_tau)| over the scalar xi, i.e. the projection of the residual
    force onto the rotated preferential axis.
    """
    C = platform.moment_alloc
    if np.linalg.cond(C) > COND_LIMIT:
        raise IllConditionedC(f"cond(moment_alloc) = {np.linalg.cond(C):.3g} exceeds {COND_LIMIT:.0e}")
    a = platform.force_alloc[:, 0]
    tau_flat = np.asarray(tau_r, dtype=float)
    shape = tau_flat.shape
    u_tau = np.linalg.solve(C, tau_flat.reshape(-1, 3).T).T.reshape(shape)
    residual = f_r - rotate(R, np.einsum("ij,...j->...i", platform.spurious_alloc, u_tau))
    Ra = rotate(R, np.broadcast_to(a, shape))
    u_f = np.einsum("...i,...i->...", Ra, residual) / np.einsum("...i,...i->...", Ra, Ra)
    return ControlInput(u_f=u_f, u_tau=u_tau)


def desired_angular_velocity(
    gains: GainSet,
    R_d: np.ndarray,
    w3: np.ndarray,
    fnorm: np.ndarray,
    align: np.ndarray,
    heading: np.ndarray,
    v: np.ndarray,
    v_dot: np.ndarray,
) -> np.ndarray:
    """Closed-form body rate of the desired attitude.

    Uses f_r_dot = -k_p v - k_v v_dot with the actual closed-loop
    acceleration, so no numerical differentiation is involved.
    """
    f_dot = -gains.k_p * v - gains.k_v * v_dot
    w3_dot = (f_dot - w3 * np.einsum("...i,...i->...", w3, f_dot)[..., None]) / fnorm[..., None]
    spin = np.cross(w3, w3_dot)
    n2 = 1.0 - align * align
    corr = (align / n2 * np.einsum("...i,i->...", spin, heading))[..., None] * w3
    return rotate_t(R_d, spin + corr)


def misalignment_term(f_r: np.ndarray, R: np.ndarray, R_d: np.ndarray, d_star: np.ndarray) -> np.ndarray:
    """Uncompensable part of the reference force due to attitude error.

    X = |f_r| ((d.Rd^T R d) R d - Rd d); vanishes whenever R d equals
    Rd d, in particular for rotations about the preferential axis.
    """
    fc = rotate(R, np.broadcast_to(d_star, R.shape[:-2] + (3,)))
    fd = rotate(R_d, np.broadcast_to(d_star, R_d.shape[:-2] + (3,)))
    fnorm = np.linalg.norm(f_r, axis=-1)
    cos_between = np.einsum("...i,...i->...", fd, fc)
    return fnorm[..., None] * (cos_between[..., None] * fc - fd)


@dataclass
class ErrorRates:
    """Right-hand sides of the closed-loop error system."""

    e_p_dot: np.ndarray
    v_dot: np.ndarray
    e_R_dot: np.ndarray
    Omega_dot: np.ndarray

    def max_norm(self) -> float:
        return float(
            max(
                np.linalg.norm(self.e_p_dot, axis=-1).max(),
                np.linalg.norm(self.v_dot, axis=-1).max(),
                np.linalg.norm(self.e_R_dot, axis=-1).max(),
                np.linalg.norm(self.Omega_dot, axis=-1).max(),
            )
        )


class HoverController:
    """Stateless closed-loop evaluator bound to one platform/reference.

    Callable as controller(t, state) -> (ControlInput, diagnostics); the
    diagnostics feed trajectory serialization.  delta widens to its
    default when no analysis domain is supplied, so free simulation is
    only guarded against genuine frame singularities.
    """

    def __init__(
        self,
        gains: GainSet,
        platform: Platform,
        reference: Reference,
        domain: DomainBounds | None = None,
    ):
        self.gains = gains
        self.platform = platform
        self.reference = reference
        self.domain = domain
        self.d_star = preferential_direction(platform)
        self.R_b = minimal_rotation_to_e3(self.d_star)
        self.f_min = THRUST_FLOOR_FRACTION * platform.weight
        self.delta = domain.delta if domain is not None else 1.0 - 1e-9
        if np.linalg.cond(platform.moment_alloc) > COND_LIMIT:
            raise IllConditionedC("moment allocation is numerically singular")
        self.last_diagnostics: dict = {}

    def attitude_setpoint(self, state: BodyState):
        f_r = reference_force(self.gains, self.platform, state, self.reference)
        R_d, R_w, w3, fnorm, align = desired_attitude(
            f_r, self.reference.heading, self.R_b, self.f_min, self.delta
        )
        return f_r, R_d, R_w, w3, fnorm, align

    def control_input(self, state: BodyState) -> ControlInput:
        f_r, R_d, _, _, _, _ = self.attitude_setpoint(state)
        tau_r = reference_moment(self.gains, self.platform, state, R_d)
        return wrench_map(self.platform, state.R, f_r, tau_r)

    def error_coordinates(self, state: BodyState, with_rates: bool = True):
        """Error tuple (e_p, v, e_R, Omega), the attitude gap, and R_d.

        With rates, also the closed-loop acceleration and the desired
        body rate at this state.
        """
        f_r, R_d, _, w3, fnorm, align = self.attitude_setpoint(state)
        e_p = state.p - self.reference.p_r
        e_R = attitude_error(state.R, R_d)
        psi_val = psi(state.R, R_d)
        out = {
            "e_p": e_p, "v": state.v, "e_R": e_R, "Omega": state.Omega,
            "psi": psi_val, "R_d": R_d, "f_r": f_r, "w3": w3,
            "fnorm": fnorm, "align": align,
        }
        if with_rates:
            tau_r = reference_moment(self.gains, self.platform, state, R_d)
            u = wrench_map(self.platform, state.R, f_r, tau_r)
            v_dot = state_derivative(self.platform, state, u).v_dot
            out["tau_r"] = tau_r
            out["u"] = u
            out["v_dot"] = v_dot
            out["Omega_d"] = desired_angular_velocity(
                self.gains, R_d, w3, fnorm, align, self.reference.heading, state.v, v_dot
            )
        return out

    def __call__(self, t, state: BodyState):
        coords = self.error_coordinates(state)
        V, V1, V2 = lyapunov_value(
            self.platform, self.gains,
            coords["e_p"], coords["v"], coords["e_R"], coords["psi"], coords["Omega"],
        )
        norm = lambda x: np.linalg.norm(x, axis=-1)
        diag = {
            "V": V, "V1": V1, "V2": V2,
            "norm_e_p": norm(coords["e_p"]),
            "norm_v": norm(coords["v"]),
            "norm_e_R": norm(coords["e_R"]),
            "norm_Omega": norm(coords["Omega"]),
            "norm_Omega_d": norm(coords["Omega_d"]),
        }
        self.last_diagnostics = {
            "f_r": coords["f_r"], "R_d": coords["R_d"], "tau_r": coords["tau_r"],
            "Omega_d": coords["Omega_d"], "X": misalignment_term(
                coords["f_r"], state.R, coords["R_d"], self.d_star
            ),
        }
        return coords["u"], diag

    def error_dynamics_rhs(self, state: BodyState) -> ErrorRates:
        """Closed-loop error rates exactly as the compact system states them.

        The translational channel uses the projector perpendicular to
        the desired thrust direction; the small residual against the
        true simulated acceleration (projector about the current
        direction) is surfaced by the consistency audits rather than
        reconciled here.
        """
        coords = self.error_coordinates(state)
        g = self.gains
        m = self.platform.mass
        R_d = coords["R_d"]
        e_R = coords["e_R"]
        Omega = state.Omega

        X = misalignment_term(coords["f_r"], state.R, R_d, self.d_star)
        fd = rotate(R_d, np.broadcast_to(self.d_star, R_d.shape[:-2] + (3,)))
        tau_pd = coords["tau_r"]  # Omega x J Omega - k_R e_R - k_Omega Omega
        C = self.platform.moment_alloc
        shape = tau_pd.shape
        spur = np.einsum(
            "ij,...j->...i", self.platform.spurious_alloc,
            np.linalg.solve(C, tau_pd.reshape(-1, 3).T).T.reshape(shape),
        )
        spur_world = rotate(state.R, spur)
        spur_perp = spur_world - fd * np.einsum("...i,...i->...", fd, spur_world)[..., None]

        v_dot = (-g.k_p * coords["e_p"] - g.k_v * state.v + X + spur_perp) / m
        e_R_dot = np.einsum(
            "...ij,...j->...i",
            transport_matrix(state.R, R_d),
            Omega - rotate_t(state.R, rotate(R_d, coords["Omega_d"])),
        )
        Omega_dot = np.einsum(
            "ij,...j->...i", self.platform.inertia_inv,
            -g.k_R * e_R - g.k_Omega * Omega,
        )
        return ErrorRates(e_p_dot=state.v, v_dot=v_dot, e_R_dot=e_R_dot, Omega_dot=Omega_dot)


def equilibrium_state(controller: HoverController) -> BodyState:
    """Hover state with zero errors: p at the setpoint, R at the desired
    attitude induced by the gravity-balancing force."""
    ref = controller.reference
    p = ref.p_r.copy()
    v = np.zeros(3)
    f_r = np.array([0.0, 0.0, controller.platform.weight])
    R_d, _, _, _, _ = desired_attitude(
        f_r, ref.heading, controller.R_b, controller.f_min, controller.delta
    )
    return BodyState(p=p, v=v, R=R_d, Omega=np.zeros(3))
