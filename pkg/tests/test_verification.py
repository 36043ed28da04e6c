import numpy as np
import pytest
from numpy.testing import assert_allclose

from coupled_hover.certificate import (
    DomainBounds,
    GainSet,
    build_V_bound_matrices,
    roa_level_from_matrices,
)
from coupled_hover.controller import HoverController, Reference, equilibrium_state
from coupled_hover.dynamics import BodyState
from coupled_hover.errors import NotCertified
from coupled_hover.so3 import exp_so3, rotation_about
from coupled_hover.verification import (
    audit_lemma_bounds,
    audit_trajectory,
    equilibrium_residual,
    fit_decay_rate,
    lyapunov_at,
    monte_carlo_roa,
    sample_domain_states,
    sample_sublevel_states,
)

from conftest import make_platform


def tilted_reference():
    return Reference(p_r=np.array([0.5, -0.2, 2.0]),
                     R_r=rotation_about([0, 0, 1], 0.7))


class TestEquilibriumResidual:
    @pytest.mark.parametrize("coupling", [0.0, 0.01, 0.05, 0.2])
    def test_vanishes_across_couplings(self, coupling, reference_gains,
                                       hover_reference, reference_domain):
        p = make_platform(coupling=coupling)
        assert equilibrium_residual(p, reference_gains, hover_reference,
                                    reference_domain) <= 1e-10

    def test_vanishes_with_tilted_heading(self, reference_gains, reference_domain):
        p = make_platform(coupling=0.05)
        assert equilibrium_residual(p, reference_gains, tilted_reference(),
                                    reference_domain) <= 1e-10

    def test_perturbation_is_nonzero(self, reference_controller):
        eq = equilibrium_state(reference_controller)
        eq.p = eq.p + np.array([1e-3, 0, 0])
        assert reference_controller.error_dynamics_rhs(eq).max_norm() > 1e-6


class TestLemmaAudit:
    def test_reference_platform_no_violations(self, reference_platform, reference_gains,
                                              hover_reference, reference_domain):
        report = audit_lemma_bounds(reference_platform, reference_gains, reference_domain,
                                    hover_reference, n_samples=2000, seed=7)
        assert report.passed
        names = [c.name for c in report.checks]
        assert names == [
            "desired_rate_bound", "misalignment_force_bound",
            "translational_energy_sandwich", "attitude_energy_sandwich",
            "transport_matrix_norm", "attitude_error_identity",
            "attitude_gap_quadratic_bounds",
        ]

    def test_deterministic_given_seed(self, reference_platform, reference_gains,
                                      hover_reference, reference_domain):
        a = audit_lemma_bounds(reference_platform, reference_gains, reference_domain,
                               hover_reference, n_samples=500, seed=11)
        b = audit_lemma_bounds(reference_platform, reference_gains, reference_domain,
                               hover_reference, n_samples=500, seed=11)
        for ca, cb in zip(a.checks, b.checks):
            assert ca.worst_violation == cb.worst_violation

    def test_boundary_gap_equality_margin(self, reference_controller, reference_domain):
        # state placed exactly at the attitude-gap cap: the quadratic
        # upper bound holds with equality up to rounding
        ctl = reference_controller
        eq = equilibrium_state(ctl)
        theta = np.arccos(1.0 - reference_domain.psi)
        state = BodyState(p=eq.p, v=eq.v,
                          R=eq.R @ exp_so3(theta * np.array([1.0, 0, 0])), Omega=eq.Omega)
        coords = ctl.error_coordinates(state, with_rates=False)
        gap = float(coords["psi"])
        e_sq = float(np.sum(coords["e_R"] ** 2))
        assert gap == pytest.approx(reference_domain.psi, abs=1e-12)
        assert gap - e_sq / (2.0 - reference_domain.psi) <= 1e-12
        assert 0.5 * e_sq - gap <= 1e-12

    def test_report_serializes(self, reference_platform, reference_gains,
                               hover_reference, reference_domain):
        import json
        report = audit_lemma_bounds(reference_platform, reference_gains, reference_domain,
                                    hover_reference, n_samples=200, seed=1)
        json.dumps(report.to_dict())


class TestSamplers:
    def test_domain_sampler_respects_bounds(self, reference_controller, reference_domain):
        rng = np.random.default_rng(0)
        states = sample_domain_states(reference_controller, reference_domain, 3000, rng)
        coords = reference_controller.error_coordinates(states, with_rates=False)
        assert np.all(np.linalg.norm(coords["e_p"], axis=-1) <= reference_domain.e_p_max * (1 + 1e-12))
        assert np.all(np.linalg.norm(coords["v"], axis=-1) <= reference_domain.v_max * (1 + 1e-12))
        assert np.all(coords["psi"] <= reference_domain.psi + 1e-12)
        assert np.all(np.abs(coords["align"]) <= reference_domain.delta + 1e-12)

    def test_boundary_states_sit_on_level(self, reference_controller, reference_domain):
        ctl = reference_controller
        M11, _, M21, _ = build_V_bound_matrices(ctl.platform, ctl.gains, reference_domain)
        level = roa_level_from_matrices(M11, M21, reference_domain)
        states = sample_sublevel_states(ctl, reference_domain, level, 20,
                                        np.random.default_rng(3), boundary=True)
        V, _, _, _ = lyapunov_at(ctl, states)
        assert np.all(V <= level * (1 + 1e-9))
        assert np.all(V >= level * 0.99)


class TestTrajectoryAudit:
    def test_zero_start_stays_zero(self, reference_platform, reference_gains,
                                   hover_reference, reference_domain):
        ctl = HoverController(reference_gains, reference_platform, hover_reference,
                              reference_domain)
        eq = equilibrium_state(ctl)
        audit = audit_trajectory(reference_platform, reference_gains, reference_domain,
                                 hover_reference, eq, h=1e-3, T=0.2)
        assert audit.report.check("lyapunov_nonincreasing").passed
        assert audit.final_V < 1e-18

    def test_flags_increase_for_indefinite_cross_weight(self, reference_platform,
                                                        hover_reference, reference_domain):
        # c2 far beyond the sandwich range makes V2 indefinite; the audit
        # must flag the decrease violation rather than hide it
        bad = GainSet(k_p=6.0, k_v=4.0, k_R=8.0, k_Omega=0.8, c1=1.2, c2=2.0)
        ctl = HoverController(bad, reference_platform, hover_reference, reference_domain)
        eq = equilibrium_state(ctl)
        x0 = BodyState(p=eq.p + [0.03, 0, 0.02], v=np.array([0.02, -0.02, 0.0]),
                       R=eq.R @ exp_so3([0.05, 0.05, 0.0]), Omega=np.array([0.1, 0.0, -0.1]))
        audit = audit_trajectory(reference_platform, bad, reference_domain,
                                 hover_reference, x0, h=1e-3, T=1.0)
        assert not audit.report.check("lyapunov_nonincreasing").passed

    def test_rate_fit_on_synthetic_decay(self):
        t = np.linspace(0, 5, 501)
        V = 3.0 * np.exp(-1.7 * t)
        assert fit_decay_rate(t, V) == pytest.approx(1.7, rel=1e-6)


class TestMonteCarloRoa:
    def test_requires_certificate(self, reference_platform, reference_gains,
                                  hover_reference, reference_domain):
        with pytest.raises(NotCertified):
            monte_carlo_roa(reference_platform, reference_gains, reference_domain,
                            hover_reference, n_trials=5, T=1.0, seed=0)

    def test_zero_trials_reports_empty(self, reference_platform, reference_gains,
                                       hover_reference, reference_domain):
        report = monte_carlo_roa(reference_platform, reference_gains, reference_domain,
                                 hover_reference, n_trials=0, T=1.0, seed=0, level=1e-4)
        assert report.fraction is None
        assert report.trials == []

    def test_deterministic_given_seed(self, reference_platform, reference_gains,
                                      hover_reference, reference_domain):
        kw = dict(n_trials=4, T=0.5, seed=21, h=1e-3, level=1e-4)
        a = monte_carlo_roa(reference_platform, reference_gains, reference_domain,
                            hover_reference, **kw)
        b = monte_carlo_roa(reference_platform, reference_gains, reference_domain,
                            hover_reference, **kw)
        assert [t.z0 for t in a.trials] == [t.z0 for t in b.trials]
        assert [t.zT for t in a.trials] == [t.zT for t in b.trials]

    def test_far_outside_domain_not_asserted(self, reference_controller):
        # states near the attitude antipode sit outside every certified
        # set; convergence from there is recorded, never required
        ctl = reference_controller
        eq = equilibrium_state(ctl)
        big = BodyState(p=eq.p, v=eq.v,
                        R=eq.R @ exp_so3(np.arccos(1 - 1.9) * np.array([1.0, 0, 0])),
                        Omega=eq.Omega)
        coords = ctl.error_coordinates(big, with_rates=False)
        assert coords["psi"] > 1.8
