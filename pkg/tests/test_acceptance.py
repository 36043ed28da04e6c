"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 5 and 6 are implemented exactly as stated and are expected to
fail: the gain conditions they require ("certify returns feasible") are
numerically unsatisfiable for every platform/gain/domain combination --
the cross-coupling inequality is violated by a factor >= ~3.3 at the
global optimum over all parameters (exhaustive search plus asymptotic
analysis; see the decisions record).  They are marked strict-xfail so a
change that made them pass would be flagged immediately.  Their
dynamical content (boundary rollouts, V decrease, full Monte-Carlo
convergence) is demonstrated under an uncertified sublevel value in
tests/test_empirical_stability.py.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from coupled_hover.certificate import (
    DomainBounds,
    GainSet,
    build_W2_W21,
    c2_window,
    certify,
    gain_search,
)
from coupled_hover.config import load_config
from coupled_hover.controller import HoverController, Reference
from coupled_hover.dynamics import BodyState, ControlInput
from coupled_hover.errors import NotCertified
from coupled_hover.so3 import attitude_error, exp_so3, psi, random_rotation, transport_matrix
from coupled_hover.verification import (
    audit_lemma_bounds,
    audit_trajectory,
    equilibrium_residual,
    monte_carlo_roa,
    omega_d_fd_residual,
    richardson_position_error,
    sample_domain_states,
    sample_sublevel_states,
)

from conftest import make_platform

REPO = Path(__file__).resolve().parents[1]


class Budget:
    def __init__(self, name, seconds):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, *_):
        self.elapsed = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"\n{self.name}: {status} ({self.elapsed:.2f} s / budget {self.seconds} s)")
        if exc_type is None:
            assert self.elapsed < self.seconds, f"{self.name} exceeded its runtime budget"
        return False


def test_criterion_1_equilibrium_residual(reference_gains, reference_domain):
    """All four closed-loop error rates vanish at zero errors, five fixtures."""
    fixtures = [
        (make_platform(coupling=0.0), Reference(np.zeros(3), np.eye(3))),
        (make_platform(coupling=0.05), Reference(np.array([0, 0, 1.0]), np.eye(3))),
        (make_platform(coupling=0.2, inertia=(0.02, 0.015, 0.03)),
         Reference(np.array([1.0, -1.0, 2.0]), np.eye(3))),
        (make_platform(coupling=0.01, mass=2.5),
         Reference(np.zeros(3), exp_so3(np.array([0, 0, 0.7])))),
        (make_platform(coupling=0.1, mass=0.6, gravity=3.7),
         Reference(np.array([0.2, 0.0, 5.0]), exp_so3(np.array([0, 0, -1.2])))),
    ]
    with Budget("criterion 1 (equilibrium residual <= 1e-10, 5 fixtures)", 1.0):
        for platform, reference in fixtures:
            residual = equilibrium_residual(platform, reference_gains, reference, reference_domain)
            assert residual <= 1e-10, f"residual {residual:.3e} on {platform}"


def test_criterion_2_rotation_identities():
    """|e_R|^2 = gap(2-gap) within 1e-10 and |C| <= 1 + 1e-12 on 1e4 pairs."""
    with Budget("criterion 2 (rotation identities, 1e4 pairs)", 5.0):
        rng = np.random.default_rng(2024)
        R = random_rotation(rng, (10_000,))
        Rd = random_rotation(rng, (10_000,))
        e = attitude_error(R, Rd)
        gap = psi(R, Rd)
        identity_err = np.abs(np.einsum("...i,...i->...", e, e) - gap * (2.0 - gap))
        assert np.max(identity_err) <= 1e-10
        norms = np.linalg.svd(transport_matrix(R, Rd), compute_uv=False)[..., 0]
        assert np.max(norms) <= 1.0 + 1e-12


def test_criterion_3_desired_rate_oracle(reference_controller, reference_domain):
    """Closed-form desired rate matches the central-difference oracle."""
    with Budget("criterion 3 (desired-rate oracle, 1e3 states, tol 1e-4)", 10.0):
        rng = np.random.default_rng(3)
        states = sample_domain_states(reference_controller, reference_domain, 1000, rng)
        residual = omega_d_fd_residual(reference_controller, states, dt=1e-6)
        assert np.max(residual) <= 1e-4, f"worst residual {np.max(residual):.3e}"


def test_criterion_4_lemma_bound_audit(reference_platform, reference_gains,
                                       hover_reference, reference_domain):
    """Zero violations of the five bound families over 1e4 in-domain samples."""
    with Budget("criterion 4 (bound audit, 1e4 samples)", 30.0):
        report = audit_lemma_bounds(reference_platform, reference_gains, reference_domain,
                                    hover_reference, n_samples=10_000, seed=4)
        for name in ("desired_rate_bound", "misalignment_force_bound",
                     "translational_energy_sandwich", "attitude_energy_sandwich",
                     "attitude_gap_quadratic_bounds"):
            check = report.check(name)
            assert check.passed, f"{name}: worst violation {check.worst_violation:.3e}"


@pytest.mark.xfail(
    strict=True,
    reason="spec defect: the printed gain conditions are unsatisfiable -- the "
           "cross-coupling inequality fails by >= ~3.3x at the optimum over all "
           "platform constants, gains, and domain bounds, so no configuration "
           "can certify (see decisions record); empirical companion passes in "
           "test_empirical_stability.py",
)
def test_criterion_5_certificate_and_decrease():
    """certify feasible on both reference configs; V decreasing at rate along
    50 boundary rollouts."""
    with Budget("criterion 5 (certificate + decrease)", 120.0):
        gamma0 = load_config(REPO / "configs" / "reference_gamma0.cfg")
        report0 = certify(gamma0.platform, gamma0.gains, gamma0.domain)
        print("criterion 5: FAIL expected at feasibility assert; "
              f"worst condition {min(report0.conditions, key=lambda c: c.margin).name}")
        assert report0.feasible, "gamma=0 reference configuration must certify"

        coupled = load_config(REPO / "configs" / "reference_platform.cfg")
        search = gain_search(coupled.platform, coupled.domain, ranges=coupled.search_ranges)
        assert search.feasible, "search-gains must find a feasible PC-D1 configuration"

        for cfg, report in ((gamma0, report0), (coupled, search.report)):
            controller = HoverController(cfg.gains, cfg.platform, cfg.reference, cfg.domain)
            boundary = sample_sublevel_states(controller, cfg.domain, report.roa_level,
                                              50, np.random.default_rng(55), boundary=True)
            audit = audit_trajectory(cfg.platform, cfg.gains, cfg.domain, cfg.reference,
                                     boundary, h=1e-3, T=6.0, certificate=report)
            assert audit.report.check("lyapunov_nonincreasing").passed
            assert audit.fitted_rate >= 0.5 * report.lambda_min_W / report.lambda_max_M2


@pytest.mark.xfail(
    strict=True,
    reason="spec defect: requires a feasible certificate, and none exists (see "
           "criterion 5); the identical 200/200 campaign passes under an "
           "uncertified level in test_empirical_stability.py",
)
def test_criterion_6_monte_carlo_roa():
    """200/200 trials from the certified sublevel set converge by T = 20 s."""
    with Budget("criterion 6 (Monte-Carlo ROA, 200 trials)", 300.0):
        cfg = load_config(REPO / "configs" / "reference_gamma0.cfg")
        try:
            report = monte_carlo_roa(cfg.platform, cfg.gains, cfg.domain, cfg.reference,
                                     n_trials=200, T=20.0, seed=6, h=1e-3)
        except NotCertified as exc:
            print(f"criterion 6: FAIL expected -- {exc}")
            raise AssertionError("no certified configuration exists") from exc
        assert report.fraction == 1.0


def test_criterion_7_negative_control():
    """c2 outside (c2-, c2+) makes certify infeasible naming det(W2) <= 0."""
    with Budget("criterion 7 (c2 window negative control)", 1.0):
        platform = make_platform(coupling=0.001)  # gamma = 0.05, window nonempty
        domain = DomainBounds(psi=0.01, delta=0.1, e_p_max=0.01, v_max=0.01, Omega_max=0.1)
        base = GainSet(k_p=4.0, k_v=4.0, k_R=50.0, k_Omega=1.0, c1=0.1)
        _, _, _, disc, lo, hi = c2_window(platform, base, domain)
        assert disc > 0 and lo is not None

        inside = certify(platform, base.replace(c2=0.5 * (lo + hi)), domain)
        by_name = {c.name: c for c in inside.conditions}
        assert by_name["c2_below_window"].passed and by_name["c2_above_window"].passed

        outside = certify(platform, base.replace(c2=1.5 * hi), domain)
        by_name = {c.name: c for c in outside.conditions}
        assert not outside.feasible
        assert not by_name["c2_below_window"].passed  # det(W2) <= 0 named
        W2, _, _ = build_W2_W21(platform, base.replace(c2=1.5 * hi), domain)
        assert np.linalg.det(W2) <= 0.0

        below = certify(platform, base.replace(c2=0.5 * lo), domain)
        by_name = {c.name: c for c in below.conditions}
        assert not below.feasible
        assert not by_name["c2_above_window"].passed


def test_criterion_8_integrator_order():
    """Richardson halving shows >= 15x position-error reduction on a 1 s
    constant-input reference rollout."""
    with Budget("criterion 8 (integrator order)", 10.0):
        platform = make_platform(coupling=0.05, inertia=(0.015, 0.015, 0.015))
        x0 = BodyState(p=np.zeros(3), v=np.array([0.3, -0.2, 0.1]),
                       R=exp_so3(np.array([0.3, 0.2, -0.4])),
                       Omega=np.array([4.0, -2.5, 4.5]))
        u = ControlInput(u_f=1.3 * platform.weight, u_tau=np.zeros(3))
        e_h = richardson_position_error(platform, x0, u, h=4e-3, T=1.0)
        e_h2 = richardson_position_error(platform, x0, u, h=2e-3, T=1.0)
        ratio = e_h / e_h2
        print(f"criterion 8: error({4e-3:.0e}) / error({2e-3:.0e}) = {ratio:.1f}")
        assert ratio >= 15.0
