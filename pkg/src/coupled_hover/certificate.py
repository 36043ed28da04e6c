"""Gain-feasibility certificate: bound matrices, conditions, ROA level.

Everything here is closed-form algebra on the platform constants, the
scalar gains, and the analysis-domain bounds.  certify() evaluates the
full ordered condition list and never exits early, so an infeasible
report names every violated inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import InfeasibleDomain, NotCertified
from .platform import Platform, spurious_gain

# Strict inequalities get this much relative margin; equality is infeasible.
STRICT_MARGIN = 1e-12


@dataclass(frozen=True)
class GainSet:
    """Isotropic controller gains plus the two Lyapunov cross weights."""

    k_p: float
    k_v: float
    k_R: float
    k_Omega: float
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        for name in ("k_p", "k_v", "k_R", "k_Omega"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.c1 < 0.0 or self.c2 < 0.0:
            raise ValueError("c1 and c2 must be nonnegative")

    def replace(self, **kw) -> "GainSet":
        d = asdict(self)
        d.update(kw)
        return GainSet(**d)


@dataclass(frozen=True)
class DomainBounds:
    """Error bounds defining the compact analysis domain.

    psi caps the attitude-error function, delta the heading/thrust
    alignment, and the three maxima cap position, velocity, and body
    rate errors.
    """

    psi: float
    delta: float
    e_p_max: float
    v_max: float
    Omega_max: float

    def __post_init__(self):
        if not 0.0 < self.psi < 1.0:
            raise ValueError(f"psi must lie in (0, 1), got {self.psi}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        for name in ("e_p_max", "v_max", "Omega_max"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")

    @property
    def e_R_max(self) -> float:
        return math.sqrt(self.psi * (2.0 - self.psi))


def f_lower(platform: Platform, gains: GainSet, domain: DomainBounds) -> float:
    """Uniform lower bound on the reference-force norm over the domain."""
    return platform.weight - gains.k_p * domain.e_p_max - gains.k_v * domain.v_max


def alpha_beta(platform: Platform, gains: GainSet, domain: DomainBounds) -> tuple[float, float]:
    """Scalars threading the attitude-rate bounds.

    alpha = (1 + delta/(1-delta^2)) / (m * f_lower); beta = lambda_max(J) * Omega_max.
    """
    f_low = f_lower(platform, gains, domain)
    if f_low <= 0.0:
        raise InfeasibleDomain(
            f"domain bounds give nonpositive force floor: m*g - k_p*e_p_max - k_v*v_max = {f_low:.6g}"
        )
    d = domain.delta
    prefactor = 1.0 + d / (1.0 - d * d)
    _, lam_max = platform.inertia_eigs()
    alpha = prefactor / (platform.mass * f_low)
    beta = lam_max * domain.Omega_max
    return alpha, beta


def build_V_bound_matrices(platform: Platform, gains: GainSet, domain: DomainBounds):
    """Quadratic sandwich matrices for the two Lyapunov pieces."""
    m = platform.mass
    lam_min, lam_max = platform.inertia_eigs()
    c1, c2 = gains.c1, gains.c2
    M11 = np.array([[gains.k_p, -c1], [-c1, m]])
    M12 = np.array([[gains.k_p, c1], [c1, m]])
    M21 = np.array([[gains.k_R, -c2], [-c2, lam_min]])
    M22 = np.array([[2.0 * gains.k_R / (2.0 - domain.psi), c2], [c2, lam_max]])
    return M11, M12, M21, M22


def build_W1_W12(platform: Platform, gains: GainSet, domain: DomainBounds):
    """Decrease matrix of the translational piece and its cross coupling."""
    m, g = platform.mass, platform.gravity
    _, lam_max = platform.inertia_eigs()
    gamma = spurious_gain(platform)
    e = domain.e_R_max
    c1 = gains.c1
    kp, kv, kR, kO = gains.k_p, gains.k_v, gains.k_R, gains.k_Omega
    rate_term = lam_max * domain.Omega_max + kO
    W1 = np.array(
        [
            [c1 * kp / m * (1.0 - e), -c1 * kv / (2.0 * m) * (1.0 + e)],
            [-c1 * kv / (2.0 * m) * (1.0 + e), kv * (1.0 - e) - c1],
        ]
    )
    W12 = np.array(
        [
            [c1 * (g + kR * gamma / m), c1 * gamma / m * rate_term],
            [kp * domain.e_p_max + m * g + gamma * kR, gamma * rate_term],
        ]
    )
    return W1, W12


def sigma_R_Omega(platform: Platform, gains: GainSet, domain: DomainBounds) -> float:
    """Off-diagonal coefficient of the attitude decrease matrix."""
    alpha, beta = alpha_beta(platform, gains, domain)
    lam_min, _ = platform.inertia_eigs()
    gamma = spurious_gain(platform)
    kv, kR, kO = gains.k_v, gains.k_R, gains.k_Omega
    mg = platform.weight
    return gains.c2 * (kO / lam_min + kv * gamma * alpha * (mg + kR * gamma)) + kR * kv * gamma * alpha * (
        beta + kO
    )


def build_W2_W21(platform: Platform, gains: GainSet, domain: DomainBounds):
    """Decrease matrix of the attitude piece, its cross coupling, and sigma."""
    m = platform.mass
    mg = platform.weight
    lam_min, lam_max = platform.inertia_eigs()
    alpha, beta = alpha_beta(platform, gains, domain)
    gamma = spurious_gain(platform)
    e = domain.e_R_max
    kp, kv, kR, kO = gains.k_p, gains.k_v, gains.k_R, gains.k_Omega
    c2 = gains.c2
    sigma = sigma_R_Omega(platform, gains, domain)
    W2 = np.array(
        [
            [c2 * kR / lam_max - kR * kv * alpha * (mg + kR * gamma), -sigma / 2.0],
            [-sigma / 2.0, kO - c2 * (1.0 + kv * gamma * alpha * (beta + kO))],
        ]
    )
    mix = abs(kv * kv / m - kp) + kv * kv / m * e
    W21 = np.array(
        [
            [kR * kp * kv * alpha * (1.0 + e), c2 * kp * kv * alpha * (1.0 + e)],
            [kR * alpha * m * mix, c2 * alpha * m * mix],
        ]
    )
    return W2, W21, sigma


def w2_cross_audit(platform: Platform, gains: GainSet, domain: DomainBounds) -> dict:
    """Compare the compact attitude decrease matrix with a direct
    re-expansion of its derivation.

    The compact off-diagonal carries an extra coupling factor on one
    term relative to the expanded form; the difference is surfaced here
    and never silently reconciled.
    """
    alpha, beta = alpha_beta(platform, gains, domain)
    lam_min, lam_max = platform.inertia_eigs()
    gamma = spurious_gain(platform)
    kv, kR, kO = gains.k_v, gains.k_R, gains.k_Omega
    mg = platform.weight
    c2 = gains.c2
    W2, _, sigma_compact = build_W2_W21(platform, gains, domain)
    # Coefficients read off the expanded derivative bound term by term.
    omega_sq_expanded = kO - c2 * (1.0 + kv * gamma * alpha * (beta + kO))
    e_R_sq_expanded = c2 * kR / lam_max - kR * kv * alpha * (mg + kR * gamma)
    sigma_expanded = c2 * (kO / lam_min + kv * alpha * (mg + kR * gamma)) + kR * kv * gamma * alpha * (
        beta + kO
    )
    return {
        "omega_sq": {"compact": float(W2[1, 1]), "expanded": float(omega_sq_expanded)},
        "e_R_sq": {"compact": float(W2[0, 0]), "expanded": float(e_R_sq_expanded)},
        "sigma": {"compact": float(sigma_compact), "expanded": float(sigma_expanded)},
        "max_abs_difference": float(
            max(
                abs(W2[1, 1] - omega_sq_expanded),
                abs(W2[0, 0] - e_R_sq_expanded),
                abs(sigma_compact - sigma_expanded),
            )
        ),
    }


def c2_window(platform: Platform, gains: GainSet, domain: DomainBounds):
    """Quadratic in c2 whose positivity is det(W2) > 0.

    Returns (A, B, C, discriminant, c2_minus, c2_plus); the roots are
    None when the discriminant is nonpositive (empty window).
    """
    alpha, beta = alpha_beta(platform, gains, domain)
    lam_min, lam_max = platform.inertia_eigs()
    gamma = spurious_gain(platform)
    kv, kR, kO = gains.k_v, gains.k_R, gains.k_Omega
    mg = platform.weight
    s_slope = kO / lam_min + kv * gamma * alpha * (mg + kR * gamma)   # sigma = s_slope*c2 + s_off
    s_off = kR * kv * gamma * alpha * (beta + kO)
    u_coup = 1.0 + kv * gamma * alpha * (beta + kO)
    A = 0.25 * s_slope**2 + kR / lam_max * u_coup
    B = kR * kv * alpha * (mg + kR * gamma) * u_coup + kR * kO / lam_max - 0.5 * s_slope * s_off
    C = kR * kv * alpha * (0.25 * kR * kv * gamma**2 * alpha * (beta + kO) ** 2 + kO * (mg + kR * gamma))
    disc = B * B - 4.0 * A * C
    if disc <= 0.0:
        return A, B, C, disc, None, None
    sq = math.sqrt(disc)
    # Stable quadratic formula for A c^2 - B c + C = 0 (A > 0, B > 0 here).
    q = 0.5 * (B + sq)
    c2_plus = q / A
    c2_minus = C / q
    return A, B, C, disc, c2_minus, c2_plus


@dataclass(frozen=True)
class Condition:
    """One strict inequality of the certificate, with slack bookkeeping."""

    name: str
    kind: str       # "upper": value < bound, "lower": value > bound
    value: float
    bound: float | None
    passed: bool
    margin: float   # positive slack means satisfied

    def describe(self) -> str:
        op = "<" if self.kind == "upper" else ">"
        bound = "empty" if self.bound is None else f"{self.bound:.6g}"
        status = "ok" if self.passed else "VIOLATED"
        return f"{self.name}: {self.value:.6g} {op} {bound}  margin={self.margin:.3g}  [{status}]"


def _strict(name: str, kind: str, value: float, bound: float | None) -> Condition:
    if bound is None or not np.isfinite(bound):
        return Condition(name, kind, float(value), None if bound is None else float(bound), False, -math.inf)
    scale = max(abs(value), abs(bound), 1.0)
    if kind == "upper":
        margin = bound - value - STRICT_MARGIN * scale
    else:
        margin = value - bound - STRICT_MARGIN * scale
    return Condition(name, kind, float(value), float(bound), bool(margin > 0.0), float(margin))


@dataclass
class CertificateReport:
    feasible: bool
    conditions: list
    M11: np.ndarray
    M12: np.ndarray
    M21: np.ndarray
    M22: np.ndarray
    W1: np.ndarray
    W12: np.ndarray
    W2: np.ndarray
    W21: np.ndarray
    W: np.ndarray
    gamma: float
    alpha: float
    beta: float
    sigma_ROmega: float
    quad_A: float
    quad_B: float
    quad_C: float
    discriminant: float
    c2_minus: float | None
    c2_plus: float | None
    lambda_min_W1: float
    lambda_min_W2: float
    lambda_min_W: float
    lambda_max_M2: float
    cross_norm: float
    roa_level: float | None
    cross_audit: dict = field(default_factory=dict)

    @property
    def decay_rate_bound(self) -> float:
        """Guaranteed exponential rate of V along certified trajectories."""
        return self.lambda_min_W / self.lambda_max_M2

    def condition_table(self) -> str:
        lines = [c.describe() for c in self.conditions]
        lines.append(f"lambda_min(W) = {self.lambda_min_W:.6g}")
        lines.append(f"feasible = {self.feasible}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        def arr(a):
            return np.asarray(a).tolist()

        return {
            "feasible": self.feasible,
            "conditions": [
                {
                    "name": c.name,
                    "kind": c.kind,
                    "value": c.value,
                    "bound": c.bound,
                    "passed": c.passed,
                    "margin": None if c.margin == -math.inf else c.margin,
                }
                for c in self.conditions
            ],
            "matrices": {
                "M11": arr(self.M11), "M12": arr(self.M12),
                "M21": arr(self.M21), "M22": arr(self.M22),
                "W1": arr(self.W1), "W12": arr(self.W12),
                "W2": arr(self.W2), "W21": arr(self.W21),
                "W": arr(self.W),
            },
            "scalars": {
                "gamma": self.gamma, "alpha": self.alpha, "beta": self.beta,
                "sigma_ROmega": self.sigma_ROmega,
                "lambda_min_W1": self.lambda_min_W1,
                "lambda_min_W2": self.lambda_min_W2,
                "lambda_min_W": self.lambda_min_W,
                "lambda_max_M2": self.lambda_max_M2,
                "cross_norm": self.cross_norm,
            },
            "c2_window": {
                "A": self.quad_A, "B": self.quad_B, "C": self.quad_C,
                "discriminant": self.discriminant,
                "c2_minus": self.c2_minus, "c2_plus": self.c2_plus,
            },
            "roa_level": self.roa_level,
            "cross_audit": self.cross_audit,
        }


def _lam_min_2x2(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(M)[0])


def certify(platform: Platform, gains: GainSet, domain: DomainBounds) -> CertificateReport:
    """Evaluate every gain condition and assemble the composite matrix.

    Condition order is fixed and all conditions are evaluated even after
    a failure, so infeasibility is attributable.
    """
    m = platform.mass
    mg = platform.weight
    lam_min, lam_max = platform.inertia_eigs()
    gamma = spurious_gain(platform)
    alpha, beta = alpha_beta(platform, gains, domain)
    e = domain.e_R_max
    kp, kv, kR, kO = gains.k_p, gains.k_v, gains.k_R, gains.k_Omega
    c1, c2 = gains.c1, gains.c2

    M11, M12, M21, M22 = build_V_bound_matrices(platform, gains, domain)
    W1, W12 = build_W1_W12(platform, gains, domain)
    W2, W21, sigma = build_W2_W21(platform, gains, domain)
    quad_A, quad_B, quad_C, disc, c2_minus, c2_plus = c2_window(platform, gains, domain)

    c1_det_bound = (
        4.0 * kp * kv * m * (e - 1.0) ** 2
        / (kv * kv * (e + 1.0) ** 2 + 4.0 * kp * m * (1.0 - e))
    )
    c2_coupling_bound = kO / (1.0 + kv * gamma * alpha * (beta + kO))
    c2_lower_bound = kv * lam_max * alpha * (mg + kR * gamma)
    c2_m2_bound = math.sqrt(lam_max * kR * 2.0 / (2.0 - domain.psi))

    cross = W12 + W21
    cross_norm = float(np.linalg.svd(cross, compute_uv=False)[0])
    lam_w1 = _lam_min_2x2(W1)
    lam_w2 = _lam_min_2x2(W2)

    conditions = [
        _strict("c1_translational_pd", "upper", c1, math.sqrt(m * kp)),
        _strict("c1_velocity_decrease", "upper", c1, kv * (1.0 - e)),
        _strict("c1_W1_determinant", "upper", c1, c1_det_bound),
        _strict("c2_attitude_pd", "upper", c2, math.sqrt(lam_min * kR)),
        _strict("c2_rate_decrease", "upper", c2, c2_coupling_bound),
        _strict("c2_below_window", "upper", c2, c2_plus),
        _strict("c2_above_gain_floor", "lower", c2, c2_lower_bound),
        _strict("c2_above_window", "lower", c2, c2_minus),
        _strict("c2_upper_sandwich_pd", "upper", c2, c2_m2_bound),
        _strict("cross_coupling", "upper", cross_norm**2, 4.0 * lam_w1 * lam_w2),
    ]

    S = 0.5 * cross
    W = np.block([[W1, -S], [-S, W2]])
    lam_w = float(np.linalg.eigvalsh(W)[0])
    lam_m2 = float(max(np.linalg.eigvalsh(M12)[-1], np.linalg.eigvalsh(M22)[-1]))

    feasible = all(c.passed for c in conditions) and lam_w > 0.0

    report = CertificateReport(
        feasible=feasible,
        conditions=conditions,
        M11=M11, M12=M12, M21=M21, M22=M22,
        W1=W1, W12=W12, W2=W2, W21=W21, W=W,
        gamma=gamma, alpha=alpha, beta=beta, sigma_ROmega=sigma,
        quad_A=quad_A, quad_B=quad_B, quad_C=quad_C,
        discriminant=disc, c2_minus=c2_minus, c2_plus=c2_plus,
        lambda_min_W1=lam_w1, lambda_min_W2=lam_w2, lambda_min_W=lam_w,
        lambda_max_M2=lam_m2, cross_norm=cross_norm,
        roa_level=None,
        cross_audit=w2_cross_audit(platform, gains, domain),
    )
    if feasible:
        report.roa_level = roa_level_from_matrices(M11, M21, domain)
    return report


def roa_level_from_matrices(M11: np.ndarray, M21: np.ndarray, domain: DomainBounds) -> float:
    """Largest sublevel value whose set provably stays inside the domain.

    The attitude radius already encodes the psi cap: the domain bound
    e_R_max = sqrt(psi*(2-psi)) is exactly the error norm at which the
    attitude-gap upper bound reaches psi, so intersecting with it keeps
    the sublevel set on the certified attitude branch.
    """
    e_R_eff = min(domain.e_R_max, math.sqrt(domain.psi * (2.0 - domain.psi)))
    lam_11 = _lam_min_2x2(M11)
    lam_21 = _lam_min_2x2(M21)
    c_translational = 0.5 * lam_11 * min(domain.e_p_max, domain.v_max) ** 2
    c_attitude = 0.5 * lam_21 * min(e_R_eff, domain.Omega_max) ** 2
    return float(min(c_translational, c_attitude))


def estimate_roa_level(platform: Platform, gains: GainSet, domain: DomainBounds) -> float:
    """Invariant sublevel value for a certified configuration."""
    report = certify(platform, gains, domain)
    if not report.feasible:
        raise NotCertified("cannot estimate a region of attraction for infeasible gains")
    return report.roa_level


def default_c1(platform: Platform, gains: GainSet, domain: DomainBounds) -> float:
    """Half the tightest upper bound on c1."""
    m, kp, kv, e = platform.mass, gains.k_p, gains.k_v, domain.e_R_max
    det_bound = (
        4.0 * kp * kv * m * (e - 1.0) ** 2
        / (kv * kv * (e + 1.0) ** 2 + 4.0 * kp * m * (1.0 - e))
    )
    return 0.5 * min(math.sqrt(m * kp), kv * (1.0 - e), det_bound)


def feasible_c2_interval(platform: Platform, gains: GainSet, domain: DomainBounds):
    """Intersection of every c2 bound; None when empty."""
    lam_min, lam_max = platform.inertia_eigs()
    gamma = spurious_gain(platform)
    alpha, beta = alpha_beta(platform, gains, domain)
    kv, kR, kO = gains.k_v, gains.k_R, gains.k_Omega
    _, _, _, disc, c2_minus, c2_plus = c2_window(platform, gains, domain)
    if c2_plus is None:
        return None
    hi = min(
        math.sqrt(lam_min * kR),
        kO / (1.0 + kv * gamma * alpha * (beta + kO)),
        math.sqrt(lam_max * kR * 2.0 / (2.0 - domain.psi)),
        c2_plus,
    )
    lo = max(kv * lam_max * alpha * (platform.weight + kR * gamma), c2_minus)
    if lo >= hi:
        return None
    return lo, hi


@dataclass
class SearchResult:
    feasible: bool
    gains: GainSet | None
    report: CertificateReport | None
    objective: float
    evaluated: int
    nearest_miss: GainSet | None = None
    nearest_miss_report: CertificateReport | None = None

    @property
    def worst_condition(self) -> str | None:
        rep = self.report if self.feasible else self.nearest_miss_report
        if rep is None:
            return None
        failing = [c for c in rep.conditions if not c.passed]
        pool = failing if failing else rep.conditions
        worst = min(pool, key=lambda c: c.margin)
        return worst.name


def _log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if n == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, n)


def thread_count() -> int:
    """Worker cap from COUPLED_HOVER_THREADS; 1 (serial) when unset."""
    import os

    raw = os.environ.get("COUPLED_HOVER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _search_point(platform, domain, kp, kv, kR, kO):
    base = GainSet(k_p=float(kp), k_v=float(kv), k_R=float(kR), k_Omega=float(kO))
    if f_lower(platform, base, domain) <= 0.0:
        return None
    c1 = default_c1(platform, base, domain)
    interval = feasible_c2_interval(platform, base, domain)
    c2 = 0.5 * (interval[0] + interval[1]) if interval else _fallback_c2(platform, base, domain)
    gains = base.replace(c1=c1, c2=c2)
    return gains, certify(platform, gains, domain)


def gain_search(
    platform: Platform,
    domain: DomainBounds,
    ranges: dict | None = None,
    points_per_axis: int = 8,
) -> SearchResult:
    """Log-grid search over the four gains.

    For every grid point c1 is set to half its tightest bound and c2 to
    the midpoint of its feasible interval when one exists.  The best
    feasible point maximizes the decay-rate proxy
    lambda_min(W) / lambda_max(M2); otherwise the nearest miss (largest
    worst normalized margin) is returned with its diagnostics.  Grid
    points evaluate independently; COUPLED_HOVER_THREADS caps the worker
    pool and an ordered reduction keeps the result deterministic.
    """
    defaults = {
        "k_p": (1e-2, 1e2),
        "k_v": (1e-2, 1e2),
        "k_R": (1e-2, 1e4),
        "k_Omega": (1e-2, 1e4),
    }
    if ranges:
        defaults.update(ranges)
    grids = {k: _log_grid(v[0], v[1], int(v[2]) if len(v) > 2 else points_per_axis) for k, v in defaults.items()}
    points = [
        (kp, kv, kR, kO)
        for kp in grids["k_p"]
        for kv in grids["k_v"]
        for kR in grids["k_R"]
        for kO in grids["k_Omega"]
    ]

    workers = thread_count()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: _search_point(platform, domain, *p), points))
    else:
        results = [_search_point(platform, domain, *p) for p in points]

    best = SearchResult(feasible=False, gains=None, report=None, objective=-math.inf, evaluated=0)
    best_miss_score = -math.inf
    evaluated = 0
    for item in results:
        if item is None:
            continue
        gains, report = item
        evaluated += 1
        if report.feasible:
            objective = report.decay_rate_bound
            if objective > best.objective or not best.feasible:
                best = SearchResult(
                    feasible=True, gains=gains, report=report,
                    objective=objective, evaluated=evaluated,
                )
        elif not best.feasible:
            score = min(
                c.margin / max(abs(c.value), abs(c.bound) if c.bound is not None else 1.0, 1.0)
                for c in report.conditions
            )
            if best.nearest_miss is None or score > best_miss_score:
                best_miss_score = score
                best.nearest_miss = gains
                best.nearest_miss_report = report
    best.evaluated = evaluated
    return best


def _fallback_c2(platform: Platform, gains: GainSet, domain: DomainBounds) -> float:
    """c2 used for nearest-miss diagnostics when no feasible interval exists."""
    lam_min, _ = platform.inertia_eigs()
    return 0.5 * math.sqrt(lam_min * gains.k_R)


def lyapunov_value(
    platform: Platform,
    gains: GainSet,
    e_p: np.ndarray,
    v: np.ndarray,
    e_R: np.ndarray,
    psi_val: np.ndarray,
    Omega: np.ndarray,
):
    """V, V1, V2 for stacked error coordinates."""
    m = platform.mass
    J = platform.inertia
    dot = lambda a, b: np.einsum("...i,...i->...", a, b)
    V1 = 0.5 * m * dot(v, v) + 0.5 * gains.k_p * dot(e_p, e_p) + gains.c1 * dot(e_p, v)
    JO = np.einsum("ij,...j->...i", J, Omega)
    V2 = 0.5 * dot(Omega, JO) + gains.k_R * np.asarray(psi_val) + gains.c2 * dot(e_R, Omega)
    return V1 + V2, V1, V2
