import numpy as np
import pytest

from src.analysis import (
    AttractorSignature,
    bistability_probe,
    classify_attractor,
    compare_signatures,
    hidden_attractor,
    local_maxima,
)
from src.analysis.attractors import attractor_distance, drift_threshold, peak_clusters, terminal_drift
from src.dynamics import Trajectory, integrate
from src.models import AttractorClass, IntegrationConfig, LyapunovResult


def synthetic(signal, t_total=200.0, t_transient=50.0, dt=0.01):
    """Trajectory whose optical real part follows ``signal`` and everything else stays at zero."""
    config = IntegrationConfig(dt=dt, t_total=t_total, t_transient=t_transient, record_stride=1)
    times = np.arange(config.n_steps + 1) * dt
    states = np.zeros((len(times), 6))
    states[:, 0] = signal(times)
    return Trajectory(times, states, config, transient_index=config.transient_steps)


def lyap(value, converged=True):
    return LyapunovResult(lambda_max=value, stderr=0.001, renorm_interval=1.0, converged=converged, n_windows=100)


def test_peak_clusters():
    assert peak_clusters(np.array([])) == []
    clusters = peak_clusters(np.array([1.0, 1.0000001, 2.0, 2.0000002]))
    assert len(clusters) == 2
    assert clusters[0][0] == 1.0 and clusters[1][1] == 2.0000002


def test_decaying_run_is_a_fixed_point(damped_params, fast_config):
    traj = integrate(np.ones(6), damped_params, fast_config)
    assert classify_attractor(traj, local_maxima(traj)) == AttractorClass.FIXED_POINT


def test_diverged_run(unstable_params):
    config = IntegrationConfig(dt=0.01, t_total=20.0, t_transient=1.0)
    traj = integrate([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], unstable_params, config)
    assert classify_attractor(traj, local_maxima(traj)) == AttractorClass.DIVERGED


def test_single_tone_is_periodic():
    traj = synthetic(np.sin)
    assert classify_attractor(traj, local_maxima(traj)) == AttractorClass.PERIODIC
    assert classify_attractor(traj, local_maxima(traj), lyap(0.0)) == AttractorClass.PERIODIC


def test_incommensurate_tones_are_quasi_periodic():
    traj = synthetic(lambda t: np.sin(t) + np.sin(np.sqrt(2.0) * t), t_total=1000.0)
    assert classify_attractor(traj, local_maxima(traj)) == AttractorClass.QUASI_PERIODIC


def test_lyapunov_decides_chaos_and_unclassifiable():
    traj = synthetic(np.sin)
    peaks = local_maxima(traj)
    assert classify_attractor(traj, peaks, lyap(0.1)) == AttractorClass.CHAOTIC
    assert classify_attractor(traj, peaks, lyap(0.1, converged=False)) == AttractorClass.UNCLASSIFIABLE


def test_fixed_point_drift_is_absolute_for_large_states():
    traj = synthetic(lambda t: 7e4 + 0.03 * np.sin(t))
    assert 0.03 <= terminal_drift(traj) <= 0.06 + 1e-9
    assert drift_threshold(traj) == pytest.approx(1e-6)
    assert classify_attractor(traj, local_maxima(traj)) == AttractorClass.NO_OSCILLATION

    still = synthetic(lambda t: np.full_like(t, 1e8))
    assert drift_threshold(still) == pytest.approx(1e-4)
    assert classify_attractor(still, local_maxima(still)) == AttractorClass.FIXED_POINT


def test_slow_drift_without_maxima_is_no_oscillation():
    traj = synthetic(lambda t: 5.0 + 1e-3 * t)
    assert classify_attractor(traj, local_maxima(traj)) == AttractorClass.NO_OSCILLATION


def test_identical_clouds_match():
    traj = synthetic(np.sin)
    sig = AttractorSignature.from_trajectory(traj, AttractorClass.PERIODIC)
    distance, threshold, same = compare_signatures(sig, sig)
    assert distance == 0.0
    assert same
    shifted = synthetic(lambda t: 3.0 + np.sin(t))
    _, _, same = compare_signatures(sig, AttractorSignature.from_trajectory(shifted, AttractorClass.PERIODIC))
    assert not same


def test_fixed_points_compared_by_final_state():
    cloud = np.zeros((10, 6))
    a = AttractorSignature(AttractorClass.FIXED_POINT, cloud, np.zeros(6))
    b = AttractorSignature(AttractorClass.FIXED_POINT, cloud, np.full(6, 1e-7))
    c = AttractorSignature(AttractorClass.FIXED_POINT, cloud, np.array([1.0, 0, 0, 0, 0, 0]))
    assert compare_signatures(a, b)[2]
    assert not compare_signatures(a, c)[2]


def test_attractor_distance_is_symmetric(rng):
    a = rng.normal(size=(200, 6))
    b = rng.normal(size=(150, 6)) + 0.5
    assert attractor_distance(a, b) == pytest.approx(attractor_distance(b, a))


def test_bistability_probe_single_attractor(damped_params, fast_config):
    params = damped_params.with_updates(alpha_in=1.0)
    report = bistability_probe(params, np.zeros(6), np.ones(6), fast_config)
    assert report.class_a == AttractorClass.FIXED_POINT
    assert report.class_b == AttractorClass.FIXED_POINT
    assert report.same_attractor
    assert report.lambda_a == pytest.approx(-1.0, abs=1e-2)


def test_bistability_probe_with_divergence(unstable_params):
    config = IntegrationConfig(dt=0.01, t_total=20.0, t_transient=1.0)
    report = bistability_probe(unstable_params, [1.0, 0, 0, 0, 0, 0], np.zeros(6), config, with_lyapunov=False)
    assert report.diverged_a
    assert report.class_a == AttractorClass.DIVERGED
    assert report.same_attractor is None
    assert report.distance is None


def test_hidden_attractor_rules(damped_params, fast_config):
    traj = synthetic(np.sin)
    assert not hidden_attractor(traj, AttractorClass.FIXED_POINT, [], damped_params, fast_config)
    assert hidden_attractor(traj, AttractorClass.PERIODIC, [], damped_params, fast_config)
