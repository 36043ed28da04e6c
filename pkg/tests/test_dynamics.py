import numpy as np
import pytest
from numpy.testing import assert_allclose

from coupled_hover.dynamics import BodyState, ControlInput, rollout, state_derivative, step
from coupled_hover.errors import NonFiniteState
from coupled_hover.platform import Platform
from coupled_hover.so3 import exp_so3, orthonormality_residual, random_rotation
from coupled_hover.verification import richardson_position_error

from conftest import make_platform


def rest_state(R=None):
    return BodyState(p=np.zeros(3), v=np.zeros(3),
                     R=np.eye(3) if R is None else R, Omega=np.zeros(3))


def test_free_fall_acceleration(reference_platform):
    d = state_derivative(reference_platform, rest_state(), ControlInput.zero())
    assert_allclose(d.v_dot, [0.0, 0.0, -9.81])
    assert_allclose(d.p_dot, np.zeros(3))


def test_hover_force_balance(reference_platform):
    # thrust column is a0 * e3 with a0 = 1, so u_f = m g / a0 hovers
    u = ControlInput(u_f=reference_platform.weight, u_tau=np.zeros(3))
    d = state_derivative(reference_platform, rest_state(), u)
    assert_allclose(d.v_dot, np.zeros(3), atol=1e-12)
    assert_allclose(d.Omega_dot, np.zeros(3), atol=1e-12)


def test_translational_residual_random_states(reference_platform):
    # m v_dot + m g e3 - R (A u_f + B u_tau) == 0 identically
    rng = np.random.default_rng(0)
    p = reference_platform
    for _ in range(50):
        state = BodyState(p=rng.normal(size=3), v=rng.normal(size=3),
                          R=random_rotation(rng), Omega=rng.normal(size=3))
        u = ControlInput(u_f=rng.normal(), u_tau=rng.normal(size=3))
        d = state_derivative(p, state, u)
        body = p.force_alloc[:, 0] * u.u_f + p.spurious_alloc @ u.u_tau
        residual = p.mass * d.v_dot + p.weight * np.eye(3)[2] - state.R @ body
        assert np.linalg.norm(residual) < 1e-12


def test_derivative_linear_in_input(reference_platform):
    rng = np.random.default_rng(1)
    state = BodyState(p=rng.normal(size=3), v=rng.normal(size=3),
                      R=random_rotation(rng), Omega=rng.normal(size=3))
    u1 = ControlInput(u_f=rng.normal(), u_tau=rng.normal(size=3))
    u2 = ControlInput(u_f=rng.normal(), u_tau=rng.normal(size=3))
    u_sum = ControlInput(u_f=u1.u_f + u2.u_f, u_tau=u1.u_tau + u2.u_tau)
    d1 = state_derivative(reference_platform, state, u1)
    d2 = state_derivative(reference_platform, state, u2)
    ds = state_derivative(reference_platform, state, u_sum)
    d0 = state_derivative(reference_platform, state, ControlInput.zero())
    assert_allclose(ds.v_dot, d1.v_dot + d2.v_dot - d0.v_dot, atol=1e-12)
    assert_allclose(ds.Omega_dot, d1.Omega_dot + d2.Omega_dot - d0.Omega_dot, atol=1e-12)


def test_step_hover_fixed_point(reference_platform):
    u = ControlInput(u_f=reference_platform.weight, u_tau=np.zeros(3))
    state = rest_state()
    out = step(reference_platform, state, u, 1e-3)
    assert np.linalg.norm(out.p - state.p) < 1e-12
    assert np.linalg.norm(out.v - state.v) < 1e-12
    assert np.max(np.abs(out.R - state.R)) < 1e-12


def test_step_pure_spin_is_exact():
    # diagonal J with Omega along e3: gyroscopic torque vanishes, so the
    # multiplicative update reproduces R0 exp(t Omega) exactly
    p = make_platform(coupling=0.0)
    omega0 = 2.1
    state = BodyState(p=np.zeros(3), v=np.zeros(3), R=np.eye(3),
                      Omega=np.array([0.0, 0.0, omega0]))
    u = ControlInput(u_f=p.weight, u_tau=np.zeros(3))
    h, n = 1e-3, 2000
    for _ in range(n):
        state = step(p, state, u, h)
    expected = exp_so3(np.array([0.0, 0.0, omega0 * n * h]))
    assert np.max(np.abs(state.R - expected)) < 1e-10
    assert_allclose(state.Omega, [0.0, 0.0, omega0], atol=1e-13)


def test_richardson_fourth_order():
    # constant input, spherical inertia, zero moment: smooth ODE where the
    # scheme is classic RK4 (the rotation update is exact here); halving h
    # must shrink the position error ~16x.  Fast spin keeps the truncation
    # error far above the float floor.
    p = make_platform(coupling=0.05, inertia=(0.015, 0.015, 0.015))
    x0 = BodyState(p=np.zeros(3), v=np.array([0.3, -0.2, 0.1]),
                   R=exp_so3(np.array([0.3, 0.2, -0.4])),
                   Omega=np.array([4.0, -2.5, 4.5]))
    u = ControlInput(u_f=1.3 * p.weight, u_tau=np.zeros(3))
    e_h = richardson_position_error(p, x0, u, h=4e-3, T=1.0)
    e_h2 = richardson_position_error(p, x0, u, h=2e-3, T=1.0)
    assert e_h > 1e-10  # truncation-dominated, not rounding
    assert e_h / e_h2 > 15.0


def test_energy_conserved_without_input():
    # no input, spherical inertia: the rate is constant, translation is a
    # polynomial, and the step conserves mechanical energy to rounding
    p = make_platform(coupling=0.0, inertia=(0.015, 0.015, 0.015))
    state = BodyState(p=np.zeros(3), v=np.array([1.0, 0.5, 2.0]),
                      R=np.eye(3), Omega=np.array([1.0, -2.0, 0.5]))

    def energy(s):
        return (0.5 * p.mass * s.v @ s.v + p.weight * s.p[2]
                + 0.5 * s.Omega @ p.inertia @ s.Omega)

    e0 = energy(state)
    for _ in range(500):
        state = step(p, state, ControlInput.zero(), 1e-3)
    assert abs(energy(state) - e0) < 1e-10


def test_orthonormality_drift_long_run():
    p = make_platform(coupling=0.0)
    state = BodyState(p=np.zeros(3), v=np.zeros(3), R=np.eye(3),
                      Omega=np.array([1.5, -1.0, 2.0]))
    u = ControlInput(u_f=p.weight, u_tau=np.zeros(3))
    for _ in range(100_000):
        state = step(p, state, u, 1e-3)
    assert orthonormality_residual(state.R) < 1e-8


def test_step_rejects_nonpositive_h(reference_platform):
    with pytest.raises(ValueError):
        step(reference_platform, rest_state(), ControlInput.zero(), 0.0)


def test_step_flags_nonfinite(reference_platform):
    state = rest_state()
    u = ControlInput(u_f=np.inf, u_tau=np.zeros(3))
    with pytest.raises(NonFiniteState):
        step(reference_platform, state, u, 1e-3)


def test_rollout_sample_count_and_grid(reference_platform):
    controller = lambda t, s: ControlInput(u_f=reference_platform.weight, u_tau=np.zeros(3))
    traj = rollout(reference_platform, rest_state(), controller, h=1e-3, T=0.5)
    assert len(traj) == 501
    assert traj.t[0] == 0.0
    assert traj.t[-1] == pytest.approx(0.5)
    assert np.allclose(np.diff(traj.t), 1e-3)


def test_rollout_propagates_failure_time(reference_platform):
    def controller(t, s):
        return ControlInput(u_f=np.inf if t > 0.01 else reference_platform.weight,
                            u_tau=np.zeros(3))

    with pytest.raises(NonFiniteState) as err:
        rollout(reference_platform, rest_state(), controller, h=1e-3, T=1.0)
    assert err.value.t is not None and err.value.t > 0.01


def test_rollout_batched_matches_scalar(reference_platform):
    rng = np.random.default_rng(3)
    states = [
        BodyState(p=rng.normal(size=3) * 0.1, v=rng.normal(size=3) * 0.1,
                  R=random_rotation(rng), Omega=rng.normal(size=3) * 0.1)
        for _ in range(3)
    ]
    batch = BodyState(
        p=np.stack([s.p for s in states]), v=np.stack([s.v for s in states]),
        R=np.stack([s.R for s in states]), Omega=np.stack([s.Omega for s in states]),
    )
    u = ControlInput(u_f=reference_platform.weight * 0.9, u_tau=np.array([1e-3, 0.0, -1e-3]))
    controller = lambda t, s: ControlInput(
        u_f=np.broadcast_to(u.u_f, s.batch_shape).copy(),
        u_tau=np.broadcast_to(u.u_tau, s.batch_shape + (3,)).copy(),
    ) if s.batch_shape else u
    out_batch = rollout(reference_platform, batch, controller, h=1e-3, T=0.05)
    for i, s in enumerate(states):
        out_i = rollout(reference_platform, s, controller, h=1e-3, T=0.05)
        assert_allclose(out_batch.p[-1][i], out_i.p[-1], atol=1e-12)
        assert_allclose(out_batch.R[-1][i], out_i.R[-1], atol=1e-12)
