"""Local maxima of a recorded component, the observable of bifurcation diagrams."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from src.dynamics.integrator import Trajectory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PeakSet:
    """Post-transient local maxima of one component."""
    variable: str
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    values: np.ndarray = field(default_factory=lambda: np.empty(0))
    refinement: str = "quadratic"

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_empty(self) -> bool:
        return len(self.values) == 0


def series_maxima(times: np.ndarray, values: np.ndarray, refine: bool = True):
    """
    Strict local maxima of a uniformly sampled series.

    Flat tops are reported once at the plateau midpoint without refinement.
    Isolated maxima are refined with the parabola through the three samples.

    Returns:
        (peak_times, peak_values) arrays
    """
    values = np.asarray(values, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if len(values) < 3:
        return np.empty(0), np.empty(0)

    idx, props = find_peaks(values, plateau_size=1)
    if len(idx) == 0:
        return np.empty(0), np.empty(0)

    left = props["left_edges"]
    right = props["right_edges"]
    peak_times = 0.5 * (times[left] + times[right])
    peak_values = values[idx].copy()

    if refine:
        single = left == right
        k = idx[single]
        y0, y1, y2 = values[k - 1], values[k], values[k + 1]
        curvature = y0 - 2.0 * y1 + y2
        ok = curvature < 0.0
        offset = np.zeros_like(y1)
        offset[ok] = 0.5 * (y0[ok] - y2[ok]) / curvature[ok]
        h = times[1] - times[0]
        peak_times[single] = times[k] + offset * h
        peak_values[single] = y1 - 0.25 * (y0 - y2) * offset

    return peak_times, peak_values


def local_maxima(trajectory: Trajectory, variable: str = "ar", refine: bool = True) -> PeakSet:
    """
    Local maxima of ``variable`` over the post-transient part of a trajectory.

    An empty PeakSet means the series is constant or monotone.
    """
    times, values = trajectory.series(variable)
    peak_times, peak_values = series_maxima(times, values, refine)
    logger.debug(f"{len(peak_values)} maxima of {variable}")
    return PeakSet(variable, peak_times, peak_values, "quadratic" if refine else "none")
