"""Numerical audit harness tying the simulator to the certificate.

Every audit is deterministic given its seed: per-trial RNG streams are
spawned from one root SeedSequence, so results do not depend on
execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certificate import (
    CertificateReport,
    DomainBounds,
    GainSet,
    build_V_bound_matrices,
    certify,
    lyapunov_value,
)
from .controller import HoverController, Reference, equilibrium_state, misalignment_term
from .dynamics import BodyState, ControlInput, Trajectory, rk4_advance, rollout
from .errors import NotCertified
from .platform import Platform
from .so3 import exp_so3, skew_part_vee, transport_matrix

Z_CONVERGENCE_RATIO = 1e-4


@dataclass
class AuditCheck:
    name: str
    samples: int
    worst_violation: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
        }


@dataclass
class AuditReport:
    checks: list
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> AuditCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "ok" if c.passed else "VIOLATED"
            lines.append(
                f"{c.name}: worst={c.worst_violation:.3e} tol={c.tolerance:.1e} "
                f"n={c.samples} [{status}]"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _unit_ball(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0)
    return direction * r


def _sample_states_core(
    controller: HoverController,
    n: int,
    rng: np.random.Generator,
    e_p_radius: float,
    v_radius: float,
    psi_cap: float,
    Omega_radius: float,
    delta: float,
    accept=None,
    max_tries: int = 400,
) -> BodyState:
    """Rejection sampler over ball-uniform error blocks.

    The attitude error is a uniform-gap rotation about the desired
    attitude induced by the sampled translational errors; `accept` may
    thin the batch further (e.g. a Lyapunov sublevel test).
    """
    ref = controller.reference
    collected: list[BodyState] = []
    count = 0
    draw = max(4 * n, 256)
    for _ in range(max_tries):
        need = n - count
        if need <= 0:
            break
        m = min(draw, 65536)
        draw *= 2
        e_p = _unit_ball(rng, m, e_p_radius)
        v = _unit_ball(rng, m, v_radius)
        Omega = _unit_ball(rng, m, Omega_radius)
        f_r = -controller.gains.k_p * e_p - controller.gains.k_v * v
        f_r[:, 2] += controller.platform.weight
        fnorm = np.linalg.norm(f_r, axis=-1)
        w3 = f_r / fnorm[:, None]
        align = w3 @ ref.heading
        ok = (np.abs(align) <= delta) & (fnorm >= controller.f_min)
        ok &= (1.0 - align**2) >= 1e-6
        if not np.any(ok):
            continue
        e_p, v, Omega = e_p[ok], v[ok], Omega[ok]
        batch = BodyState(
            p=ref.p_r + e_p, v=v,
            R=np.broadcast_to(np.eye(3), (e_p.shape[0], 3, 3)).copy(),
            Omega=Omega,
        )
        _, R_d, _, _, _, _ = controller.attitude_setpoint(batch)
        gap = rng.uniform(0.0, psi_cap, size=e_p.shape[0])
        theta = np.arccos(1.0 - gap)
        axis = rng.normal(size=(e_p.shape[0], 3))
        axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
        batch.R = R_d @ exp_so3(axis * theta[:, None])
        if accept is not None:
            keep = accept(batch)
            if not np.any(keep):
                continue
            batch = batch.select(keep)
        collected.append(batch)
        count += batch.batch_shape[0]
    if count < n:
        raise RuntimeError(f"state sampler starved ({count}/{n} accepted)")
    return BodyState(
        p=np.concatenate([s.p for s in collected])[:n],
        v=np.concatenate([s.v for s in collected])[:n],
        R=np.concatenate([s.R for s in collected])[:n],
        Omega=np.concatenate([s.Omega for s in collected])[:n],
    )


def sample_domain_states(
    controller: HoverController,
    domain: DomainBounds,
    n: int,
    rng: np.random.Generator,
    max_tries: int = 400,
) -> BodyState:
    """Uniform-ish states in the analysis domain, guards by rejection."""
    return _sample_states_core(
        controller, n, rng,
        e_p_radius=domain.e_p_max, v_radius=domain.v_max,
        psi_cap=domain.psi, Omega_radius=domain.Omega_max,
        delta=domain.delta, max_tries=max_tries,
    )


def lyapunov_at(controller: HoverController, state: BodyState):
    coords = controller.error_coordinates(state, with_rates=False)
    V, V1, V2 = lyapunov_value(
        controller.platform, controller.gains,
        coords["e_p"], coords["v"], coords["e_R"], coords["psi"], coords["Omega"],
    )
    return V, V1, V2, coords


def z_norm(coords) -> np.ndarray:
    return np.sqrt(
        np.linalg.norm(coords["e_p"], axis=-1) ** 2
        + np.linalg.norm(coords["v"], axis=-1) ** 2
        + np.linalg.norm(coords["e_R"], axis=-1) ** 2
        + np.linalg.norm(coords["Omega"], axis=-1) ** 2
    )


def sublevel_caps(platform: Platform, gains: GainSet, domain: DomainBounds, level: float):
    """Exact per-block suprema of the error norms over {V <= level}.

    Minimizing V over the complementary variable of each pair gives the
    Schur-reduced coefficient, so the returned box tightly contains the
    sublevel set (required for exact rejection sampling inside it).
    """
    m = platform.mass
    lam_min, _ = platform.inertia_eigs()
    c1, c2 = gains.c1, gains.c2
    k_ep = gains.k_p - c1 * c1 / m
    k_v = m - c1 * c1 / gains.k_p
    k_psi = gains.k_R - c2 * c2 / lam_min  # uses |e_R|^2 <= 2 psi
    k_om = lam_min - c2 * c2 / gains.k_R   # uses psi >= |e_R|^2 / 2
    if min(k_ep, k_v, k_psi, k_om) <= 0.0:
        raise NotCertified("cross weights exceed the sandwich positivity range")
    return {
        "e_p": min(domain.e_p_max, math.sqrt(2.0 * level / k_ep)),
        "v": min(domain.v_max, math.sqrt(2.0 * level / k_v)),
        "psi": min(domain.psi, level / k_psi),
        "Omega": min(domain.Omega_max, math.sqrt(2.0 * level / k_om)),
    }


def sample_sublevel_states(
    controller: HoverController,
    domain: DomainBounds,
    level: float,
    n: int,
    rng: np.random.Generator,
    boundary: bool = False,
    max_tries: int = 400,
) -> BodyState:
    """States inside the Lyapunov sublevel set, by exact rejection.

    With boundary=True each accepted state is rescaled (bisection on a
    common amplitude factor applied to all four error blocks) until its
    Lyapunov value lands just below the level.
    """
    caps = sublevel_caps(controller.platform, controller.gains, domain, level)

    def accept(batch: BodyState) -> np.ndarray:
        V, _, _, _ = lyapunov_at(controller, batch)
        return V <= level

    state = _sample_states_core(
        controller, n, rng,
        e_p_radius=caps["e_p"], v_radius=caps["v"],
        psi_cap=caps["psi"], Omega_radius=caps["Omega"],
        delta=domain.delta, accept=accept, max_tries=max_tries,
    )
    if boundary:
        state = _rescale_to_level(controller, domain, state, level)
    return state


def _rescale_to_level(controller, domain, state: BodyState, level: float) -> BodyState:
    """Bisect a common error amplitude so V(state_s) is just below `level`."""
    ref = controller.reference
    e_p0 = state.p - ref.p_r
    v0 = state.v
    Om0 = state.Omega
    coords = controller.error_coordinates(state, with_rates=False)
    R_d0 = coords["R_d"]
    rot0 = np.einsum("...ji,...jk->...ik", R_d0, state.R)
    from .so3 import log_so3

    tangent = log_so3(rot0)

    def build(s):
        flat = BodyState(p=ref.p_r + s[:, None] * e_p0, v=s[:, None] * v0,
                         R=state.R, Omega=s[:, None] * Om0)
        _, R_d, _, _, _, _ = controller.attitude_setpoint(flat)
        flat.R = R_d @ exp_so3(s[:, None] * tangent)
        return flat

    n = state.batch_shape[0]
    lo = np.zeros(n)
    hi = np.ones(n)
    # grow hi until V >= level or the domain edge stops us
    for _ in range(40):
        st = build(hi)
        V, _, _, _ = lyapunov_at(controller, st)
        grow = (V < 0.999 * level) & (hi < 1e3)
        if not np.any(grow):
            break
        hi[grow] *= 1.5
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        st = build(mid)
        V, _, _, _ = lyapunov_at(controller, st)
        too_big = V > level
        hi[too_big] = mid[too_big]
        lo[~too_big] = mid[~too_big]
    return build(lo)


def equilibrium_residual(platform: Platform, gains: GainSet, reference: Reference,
                         domain: DomainBounds | None = None) -> float:
    """Max norm of the four closed-loop error rates at zero errors."""
    controller = HoverController(gains, platform, reference, domain)
    eq = equilibrium_state(controller)
    return controller.error_dynamics_rhs(eq).max_norm()


def omega_d_fd_residual(controller: HoverController, state: BodyState, dt: float = 1e-6) -> np.ndarray:
    """Difference between the closed-form desired rate and a central
    difference of the desired attitude along the closed-loop flow.

    The flow is advanced by +/- dt with the input frozen at the center
    state; the zero-order-hold error is even in dt and cancels in the
    central difference.
    """
    coords = controller.error_coordinates(state)
    u = coords["u"]
    plus = rk4_advance(controller.platform, state, u, dt)
    minus = rk4_advance(controller.platform, state, u, -dt)
    R_d_plus = controller.attitude_setpoint(plus)[1]
    R_d_minus = controller.attitude_setpoint(minus)[1]
    R_dot = (R_d_plus - R_d_minus) / (2.0 * dt)
    omega_fd = skew_part_vee(np.einsum("...ji,...jk->...ik", coords["R_d"], R_dot))
    return np.linalg.norm(omega_fd - coords["Omega_d"], axis=-1)


def audit_lemma_bounds(
    platform: Platform,
    gains: GainSet,
    domain: DomainBounds,
    reference: Reference,
    n_samples: int = 10_000,
    seed: int = 0,
) -> AuditReport:
    """Per-sample audit of every closed-form bound on in-domain states."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    controller = HoverController(gains, platform, reference, domain)
    state = sample_domain_states(controller, domain, n_samples, rng)
    coords = controller.error_coordinates(state)

    norm = lambda x: np.linalg.norm(x, axis=-1)
    e_p_n, v_n = norm(coords["e_p"]), norm(coords["v"])
    e_R_n, Om_n = norm(coords["e_R"]), norm(coords["Omega"])
    psi_val = coords["psi"]
    checks = []

    def add(name, violation, tolerance, **details):
        worst = float(np.max(violation))
        checks.append(AuditCheck(name, n_samples, worst, tolerance, worst <= tolerance, details))

    # desired-rate bound under the alignment guard
    d = domain.delta
    prefactor = 1.0 + d / (1.0 - d * d)
    f_dot = -gains.k_p * state.v - gains.k_v * coords["v_dot"]
    bound = prefactor * norm(f_dot) / coords["fnorm"]
    add("desired_rate_bound", norm(coords["Omega_d"]) - bound, 1e-9 * float(np.max(bound)))

    # misalignment force bound
    X = misalignment_term(coords["f_r"], state.R, coords["R_d"], controller.d_star)
    x_bound = (gains.k_p * e_p_n + gains.k_v * v_n + platform.weight) * e_R_n
    add("misalignment_force_bound", norm(X) - x_bound, 1e-9 * max(1.0, float(np.max(x_bound))))

    # Lyapunov sandwiches
    M11, M12, M21, M22 = build_V_bound_matrices(platform, gains, domain)
    V, V1, V2 = lyapunov_value(platform, gains, coords["e_p"], coords["v"],
                               coords["e_R"], psi_val, coords["Omega"])
    z1 = np.stack([e_p_n, v_n], axis=-1)
    z2 = np.stack([e_R_n, Om_n], axis=-1)
    quad = lambda M, z: 0.5 * np.einsum("...i,ij,...j->...", z, M, z)
    scale1 = 1e-12 * max(1.0, float(np.max(np.abs(V1))))
    scale2 = 1e-12 * max(1.0, float(np.max(np.abs(V2))))
    add("translational_energy_sandwich",
        np.maximum(quad(M11, z1) - V1, V1 - quad(M12, z1)), scale1)
    add("attitude_energy_sandwich",
        np.maximum(quad(M21, z2) - V2, V2 - quad(M22, z2)), scale2)

    # transport matrix norm
    Cmat = transport_matrix(state.R, coords["R_d"])
    add("transport_matrix_norm",
        np.linalg.svd(Cmat, compute_uv=False)[..., 0] - 1.0, 1e-12)

    # error-norm identity and the quadratic gap bounds
    add("attitude_error_identity",
        np.abs(e_R_n**2 - psi_val * (2.0 - psi_val)), 1e-10)
    add("attitude_gap_quadratic_bounds",
        np.maximum(0.5 * e_R_n**2 - psi_val, psi_val - e_R_n**2 / (2.0 - domain.psi)), 1e-12)

    return AuditReport(checks=checks, seed=seed)


def estimate_kappa(
    platform: Platform,
    controller: HoverController,
    x0: BodyState,
    h: float,
    T_probe: float = 0.2,
) -> float:
    """Slack scale for first-order derivative checks along rollouts.

    Runs a short Richardson pair (h, h/2) and measures how much the
    finite-difference dV/dt moves between the two resolutions, relative
    to the squared error norm; tol = kappa * h * |z|^2 then tracks the
    zero-order-hold discretization error at any decay level.
    """
    traj_h = rollout(platform, x0, controller, h, T_probe, record="diag")
    traj_h2 = rollout(platform, x0, controller, h / 2.0, T_probe, record="diag")
    V_h, V_h2 = traj_h.diagnostics["V"], traj_h2.diagnostics["V"]
    d_h = np.diff(V_h, axis=0) / h
    d_h2 = np.diff(V_h2, axis=0)[::2] / (h / 2.0)
    k = min(d_h.shape[0], d_h2.shape[0])
    z2 = _z_sq_from_diag(traj_h.diagnostics)[:k]
    gap = np.abs(d_h[:k] - d_h2[:k]) / np.maximum(z2, 1e-30)
    return float(np.max(gap) / h) * 2.0 + 1e-6


def _z_sq_from_diag(diag: dict) -> np.ndarray:
    return (
        diag["norm_e_p"] ** 2
        + diag["norm_v"] ** 2
        + diag["norm_e_R"] ** 2
        + diag["norm_Omega"] ** 2
    )


@dataclass
class TrajectoryAudit:
    report: AuditReport
    fitted_rate: float
    rate_floor: float | None
    kappa: float
    final_V: float

    @property
    def passed(self) -> bool:
        ok = self.report.passed
        if self.rate_floor is not None:
            ok = ok and self.fitted_rate >= self.rate_floor
        return ok


def audit_trajectory(
    platform: Platform,
    gains: GainSet,
    domain: DomainBounds,
    reference: Reference,
    x0: BodyState,
    h: float,
    T: float,
    certificate: CertificateReport | None = None,
    seed: int | None = None,
) -> TrajectoryAudit:
    """Roll out the closed loop and audit the certificate's claims.

    Checks, per sample: V non-increase within kappa*h slack, the
    composite decrease dV/dt <= -lambda_min(W)|z|^2 (only when a
    certificate with positive lambda_min(W) is supplied), the block
    decrease bounds, domain membership, and the desired-rate oracle at
    the initial states.  Also fits the exponential rate of V.
    """
    controller = HoverController(gains, platform, reference, domain)
    kappa = estimate_kappa(platform, controller, x0, h)
    traj = rollout(platform, x0, controller, h, T, record="diag")
    diag = traj.diagnostics
    V, V1, V2 = diag["V"], diag["V1"], diag["V2"]
    z_sq = _z_sq_from_diag(diag)
    n_samples = V.shape[0]
    checks = []

    # Rounding floor: V is assembled from O(scale) intermediates, so
    # finite differences of V carry ~eps*scale/h of pure float noise.
    scale_V = max(1.0, float(np.max(V[0])), gains.k_R, platform.weight * domain.e_p_max)
    noise_floor = 64.0 * np.finfo(float).eps * scale_V / h

    def add(name, violation, tolerance, **details):
        worst = float(np.max(violation))
        checks.append(AuditCheck(name, int(np.size(violation)), worst, float(tolerance), worst <= tolerance, details))

    slack = kappa * h * np.maximum(z_sq[:-1], 1e-30) + noise_floor
    dV = np.diff(V, axis=0) / h
    add("lyapunov_nonincreasing", dV - slack, 1e-12, kappa=kappa, noise_floor=noise_floor)

    if certificate is not None and certificate.lambda_min_W > 0.0:
        decrease = dV + certificate.lambda_min_W * z_sq[:-1] - slack
        add("composite_decrease", decrease, 1e-12, lambda_min_W=certificate.lambda_min_W)

    if certificate is not None:
        z1_sq = diag["norm_e_p"] ** 2 + diag["norm_v"] ** 2
        z2_sq = diag["norm_e_R"] ** 2 + diag["norm_Omega"] ** 2
        z1 = np.stack([diag["norm_e_p"], diag["norm_v"]], axis=-1)
        z2 = np.stack([diag["norm_e_R"], diag["norm_Omega"]], axis=-1)
        quad = lambda M, a, b: np.einsum("...i,ij,...j->...", a, M, b)
        bound1 = -quad(certificate.W1, z1, z1) + quad(certificate.W12, z1, z2)
        bound2 = -quad(certificate.W2, z2, z2) + quad(certificate.W21, z1, z2)
        dV1 = np.diff(V1, axis=0) / h
        dV2 = np.diff(V2, axis=0) / h
        add("translational_decrease_bound", dV1 - bound1[:-1] - slack, 1e-12)
        add("attitude_decrease_bound", dV2 - bound2[:-1] - slack, 1e-12)

    add("domain_e_p", diag["norm_e_p"] - domain.e_p_max, 1e-9)
    add("domain_v", diag["norm_v"] - domain.v_max, 1e-9)
    add("domain_e_R", diag["norm_e_R"] - domain.e_R_max, 1e-9)
    add("domain_Omega", diag["norm_Omega"] - domain.Omega_max, 1e-9)

    fd = omega_d_fd_residual(controller, x0)
    add("desired_rate_fd_consistency", fd, 1e-4)

    # exponential-rate fit of log V over the decaying stretch
    fitted = fit_decay_rate(traj.t, V)
    rate_floor = None
    if certificate is not None:
        rate_floor = 0.5 * certificate.lambda_min_W / certificate.lambda_max_M2

    return TrajectoryAudit(
        report=AuditReport(checks=checks, seed=seed),
        fitted_rate=fitted,
        rate_floor=rate_floor,
        kappa=kappa,
        final_V=float(np.max(V[-1])),
    )


def fit_decay_rate(t: np.ndarray, V: np.ndarray) -> float:
    """Least-squares slope of -log V(t), floored away from rounding noise.

    For batched V the fit runs on the worst (slowest-decaying) trail,
    i.e. the max across the batch at each time.
    """
    V_worst = V if V.ndim == 1 else np.max(V.reshape(V.shape[0], -1), axis=1)
    floor = max(1e-280, float(V_worst[0]) * 1e-14)
    keep = V_worst > floor
    if np.sum(keep) < 2:
        return math.inf
    logv = np.log(V_worst[keep])
    tt = t[keep]
    slope = np.polyfit(tt, logv, 1)[0]
    return float(-slope)


@dataclass
class RoaTrial:
    z0: float
    zT: float
    converged: bool
    t_converged: float | None


@dataclass
class RoaReport:
    fraction: float | None
    trials: list
    level: float
    seed: int
    T: float
    h: float
    ratio: float = Z_CONVERGENCE_RATIO

    def to_dict(self) -> dict:
        return {
            "fraction": self.fraction,
            "level": self.level,
            "seed": self.seed,
            "T": self.T,
            "h": self.h,
            "ratio": self.ratio,
            "trials": [
                {"z0": tr.z0, "zT": tr.zT, "converged": tr.converged, "t_converged": tr.t_converged}
                for tr in self.trials
            ],
        }


def monte_carlo_roa(
    platform: Platform,
    gains: GainSet,
    domain: DomainBounds,
    reference: Reference,
    n_trials: int,
    T: float,
    seed: int,
    h: float = 1e-3,
    certificate: CertificateReport | None = None,
    level: float | None = None,
    ratio: float = Z_CONVERGENCE_RATIO,
) -> RoaReport:
    """Convergence campaign from initial states sampled in the sublevel set.

    Requires a feasible certificate (raises NotCertified otherwise); an
    externally supplied certificate/level runs the same campaign for
    empirical study of uncertified configurations.
    """
    if certificate is None and level is None:
        certificate = certify(platform, gains, domain)
        if not certificate.feasible:
            raise NotCertified("configuration is not certificate-feasible")
    if level is None:
        if not certificate.roa_level:
            raise NotCertified("certificate carries no sublevel value")
        level = certificate.roa_level
    if n_trials <= 0:
        return RoaReport(fraction=None, trials=[], level=level, seed=seed, T=T, h=h)

    root = np.random.SeedSequence(seed)
    streams = root.spawn(n_trials)
    controller = HoverController(gains, platform, reference, domain)
    states = [
        sample_sublevel_states(controller, domain, level, 1, np.random.default_rng(s))
        for s in streams
    ]
    x0 = BodyState(
        p=np.concatenate([s.p for s in states]),
        v=np.concatenate([s.v for s in states]),
        R=np.concatenate([s.R for s in states]),
        Omega=np.concatenate([s.Omega for s in states]),
    )
    _, _, _, coords0 = lyapunov_at(controller, x0)
    z0 = z_norm(coords0)

    n_steps = int(np.floor(T / h + 1e-9))
    state = x0.copy()
    t_conv = np.full(n_trials, np.nan)
    threshold = ratio * z0
    for k in range(n_steps):
        u, diag = controller(k * h, state)
        state = rk4_advance(platform, state, u, h)
        if (k + 1) % 50 == 0 or k == n_steps - 1:
            _, _, _, coords = lyapunov_at(controller, state)
            z = z_norm(coords)
            newly = (z < threshold) & np.isnan(t_conv)
            t_conv[newly] = (k + 1) * h
    _, _, _, coords_T = lyapunov_at(controller, state)
    zT = z_norm(coords_T)
    converged = zT < threshold

    trials = [
        RoaTrial(z0=float(z0[i]), zT=float(zT[i]), converged=bool(converged[i]),
                 t_converged=None if np.isnan(t_conv[i]) else float(t_conv[i]))
        for i in range(n_trials)
    ]
    return RoaReport(
        fraction=float(np.mean(converged)), trials=trials, level=level,
        seed=seed, T=T, h=h, ratio=ratio,
    )


def richardson_position_error(
    platform: Platform,
    x0: BodyState,
    u: ControlInput,
    h: float,
    T: float,
    baseline_factor: int = 10,
) -> float:
    """Final-position error of a constant-input rollout at step h,
    measured against an h/baseline_factor reference."""

    def final_p(step_size):
        n = int(round(T / step_size))
        st = x0.copy()
        for _ in range(n):
            st = rk4_advance(platform, st, u, step_size)
        return st.p

    ref = final_p(h / baseline_factor)
    return float(np.linalg.norm(final_p(h) - ref))
