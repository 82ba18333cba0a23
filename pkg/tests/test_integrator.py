import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.dynamics import TerminationCause, integrate, rk4_step
from src.equilibria import find_fixed_points
from src.exceptions import DivergenceError, InvalidInputError
from src.models import IntegrationConfig, SystemParams


@pytest.fixture
def nonlinear_params():
    return SystemParams(
        omega1=1.0, omega2=1.0, kappa=0.5, delta=1.0, g1=0.3, g2=0.3,
        gamma1=0.2, gamma2=0.2, jm=0.3, theta=0.7, alpha_in=1.0, convention="rederived",
    )


def test_single_step_of_linear_decay(damped_params):
    out = rk4_step(np.ones(6), 0.1, damped_params)
    # fourth-order Taylor polynomial of exp(-0.1)
    assert_allclose(out, np.full(6, 0.9048375), rtol=0.0, atol=1e-12)


def test_rk4_is_fourth_order(nonlinear_params):
    y0 = np.array([0.5, -0.2, 0.1, 0.3, -0.1, 0.2])
    finals = []
    for dt in (0.05, 0.025, 0.0125):
        config = IntegrationConfig(dt=dt, t_total=2.0, t_transient=0.0, record_stride=1)
        traj = integrate(y0, nonlinear_params, config)
        assert traj.times[-1] == pytest.approx(2.0)
        finals.append(traj.final_state)
    coarse_error = np.linalg.norm(finals[0] - finals[1])
    fine_error = np.linalg.norm(finals[1] - finals[2])
    order = math.log2(coarse_error / fine_error)
    assert 3.7 <= order <= 4.3


def test_integrate_matches_repeated_steps(nonlinear_params):
    y = np.array([0.5, -0.2, 0.1, 0.3, -0.1, 0.2])
    config = IntegrationConfig(dt=0.01, t_total=0.5, t_transient=0.0, record_stride=50)
    traj = integrate(y, nonlinear_params, config)
    for _ in range(50):
        y = rk4_step(y, 0.01, nonlinear_params)
    assert_allclose(traj.final_state, y, rtol=1e-12, atol=1e-14)


def test_sampling_and_transient_bookkeeping(damped_params):
    config = IntegrationConfig(dt=0.01, t_total=1.0, t_transient=0.5, record_stride=10)
    traj = integrate(np.ones(6), damped_params, config)
    assert len(traj.times) == 11
    assert_allclose(traj.times, np.arange(11) * 0.1)
    assert traj.transient_index == 5
    times, _ = traj.post_transient()
    assert times[0] == pytest.approx(0.5)

    trimmed = integrate(np.ones(6), damped_params, config.model_copy(update={"keep_transient": False}))
    assert trimmed.transient_index == 0
    assert_allclose(trimmed.times, traj.times[5:])
    assert_allclose(trimmed.states, traj.states[5:])


def test_undriven_damped_run_decays(damped_params):
    config = IntegrationConfig(dt=0.01, t_total=30.0, t_transient=10.0, record_stride=10)
    traj = integrate(np.ones(6), damped_params, config)
    assert traj.cause == TerminationCause.COMPLETED
    assert np.max(np.abs(traj.final_state)) < 1e-6


def test_divergence_truncates_trajectory(unstable_params):
    config = IntegrationConfig(dt=0.01, t_total=20.0, t_transient=1.0, record_stride=10)
    traj = integrate([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], unstable_params, config)
    assert traj.terminated_early
    assert traj.cause == TerminationCause.DIVERGENCE
    assert 0.0 < traj.divergence_time < 20.0
    assert np.all(np.isfinite(traj.states))
    assert np.max(np.abs(traj.states)) <= config.blow_up_bound


def test_rk4_step_errors(unstable_params, damped_params):
    with pytest.raises(DivergenceError):
        rk4_step([9e11, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0, unstable_params)
    with pytest.raises(InvalidInputError):
        rk4_step(np.ones(6), 0.0, damped_params)
    with pytest.raises(InvalidInputError):
        integrate(np.ones(3), damped_params, IntegrationConfig(t_total=1.0, t_transient=0.0))


def test_series_rejects_unknown_variable(damped_params):
    config = IntegrationConfig(dt=0.01, t_total=1.0, t_transient=0.0)
    traj = integrate(np.ones(6), damped_params, config)
    with pytest.raises(InvalidInputError):
        traj.series("x")


def test_stable_fixed_point_is_preserved(kerr_params):
    lower = find_fixed_points(kerr_params)[0]
    assert lower.stable
    config = IntegrationConfig(dt=0.01, t_total=100.0, t_transient=0.0, record_stride=100)
    traj = integrate(lower.state, kerr_params, config)
    assert traj.cause == TerminationCause.COMPLETED
    assert np.max(np.abs(traj.states - lower.state)) < 1e-6


def test_trajectories_are_bit_identical(nonlinear_params):
    y0 = np.array([0.5, -0.2, 0.1, 0.3, -0.1, 0.2])
    config = IntegrationConfig(dt=0.01, t_total=20.0, t_transient=5.0, record_stride=3)
    first = integrate(y0, nonlinear_params, config)
    second = integrate(y0.copy(), nonlinear_params, config)
    assert np.array_equal(first.times, second.times)
    assert np.array_equal(first.states, second.states)
