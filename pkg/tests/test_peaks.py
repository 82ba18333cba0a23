import numpy as np
import pytest

from src.analysis import local_maxima
from src.analysis.peaks import series_maxima
from src.dynamics import integrate
from src.models import IntegrationConfig


def test_sine_maxima_are_refined():
    t = np.arange(0.0, 20.0, 0.01)
    times, values = series_maxima(t, np.sin(t))
    assert len(values) == 3
    np.testing.assert_allclose(times, np.pi / 2 + 2 * np.pi * np.arange(3), atol=1e-4)
    np.testing.assert_allclose(values, 1.0, atol=1e-6)


def test_plateau_reported_once_at_its_midpoint():
    times, values = series_maxima(np.arange(7.0), np.array([0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0]))
    assert times.tolist() == [3.0]
    assert values.tolist() == [2.0]


@pytest.mark.parametrize("series", [
    np.linspace(0.0, 1.0, 50),
    np.full(50, 3.0),
    np.array([1.0, 2.0]),
])
def test_no_maxima(series):
    times, values = series_maxima(np.arange(len(series), dtype=float), series)
    assert len(times) == 0 and len(values) == 0


def test_unrefined_maxima_are_samples():
    t = np.arange(0.0, 20.0, 0.01)
    _, values = series_maxima(t, np.sin(t), refine=False)
    assert set(values) <= set(np.sin(t))


def test_monotone_decay_has_no_peaks(damped_params):
    config = IntegrationConfig(dt=0.01, t_total=10.0, t_transient=2.0)
    peaks = local_maxima(integrate(np.ones(6), damped_params, config), "ar")
    assert peaks.is_empty
    assert len(peaks) == 0
    assert peaks.variable == "ar"
