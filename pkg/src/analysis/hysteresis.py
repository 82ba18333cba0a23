"""Adiabatic parameter sweeps for bifurcation diagrams and hysteresis detection."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import wasserstein_distance

from src.analysis.attractors import classify_attractor
from src.analysis.lyapunov import lyapunov_max
from src.analysis.peaks import PeakSet, local_maxima
from src.dynamics.integrator import integrate
from src.exceptions import InvalidInputError
from src.models import (
    AttractorClass,
    IntegrationConfig,
    SweepDirection,
    SystemParams,
    as_state_array,
    physical_parameter_names,
)

logger = logging.getLogger(__name__)

STATIONARY = (AttractorClass.FIXED_POINT, AttractorClass.NO_OSCILLATION, AttractorClass.DIVERGED)


@dataclass(frozen=True)
class HysteresisPoint:
    """Outcome at one value of the swept parameter."""
    value: float
    direction: SweepDirection
    peaks: Dict[str, PeakSet]
    attractor_class: AttractorClass
    final_state: np.ndarray
    lambda_max: Optional[float] = None
    restarted: bool = False


def sweep_values(value_range: Tuple[float, float], n_points: int, direction: SweepDirection) -> np.ndarray:
    lo, hi = value_range
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise InvalidInputError(f"sweep range must be finite, got {value_range}")
    if n_points < 2:
        raise InvalidInputError(f"n_points must be at least 2, got {n_points}")
    values = np.linspace(lo, hi, n_points)
    return values if direction == SweepDirection.UP else values[::-1]


def hysteresis_sweep(params_base: SystemParams, sweep_param: str, value_range: Tuple[float, float],
                     n_points: int, direction: SweepDirection, config: IntegrationConfig,
                     ic=None, variables: Sequence[str] = ("ar", "b1r"),
                     compute_lyapunov: bool = False, renorm_interval: float = 1.0) -> List[HysteresisPoint]:
    """
    Sweep one parameter, seeding each point with the previous final state.

    A diverged point is recorded as such and the chain restarts from the
    all-zero state at the next value.
    """
    if sweep_param not in physical_parameter_names():
        raise InvalidInputError(f"unknown sweep parameter '{sweep_param}'")
    direction = SweepDirection(direction)
    state = as_state_array(ic if ic is not None else np.zeros(6))
    restart_next = False
    points = []

    logger.info(f"Sweeping {sweep_param} {direction.value} over {value_range} ({n_points} points)")
    for value in sweep_values(value_range, n_points, direction):
        params = params_base.with_updates(**{sweep_param: float(value)})
        restarted = restart_next
        if restart_next:
            state = np.zeros(6)
            restart_next = False

        traj = integrate(state, params, config)
        peaks = {name: local_maxima(traj, name) for name in variables}
        lyap = None
        if compute_lyapunov and not traj.terminated_early:
            lyap = lyapunov_max(state, params, config, renorm_interval)
        cls = classify_attractor(traj, peaks[variables[0]], lyap)

        if traj.terminated_early:
            logger.warning(f"{sweep_param}={value:.6g} diverged; restarting from the origin")
            restart_next = True
        else:
            state = traj.final_state.copy()

        points.append(HysteresisPoint(
            value=float(value),
            direction=direction,
            peaks=peaks,
            attractor_class=cls,
            final_state=traj.final_state.copy(),
            lambda_max=lyap.lambda_max if lyap else None,
            restarted=restarted,
        ))
        logger.debug(f"{sweep_param}={value:.6g}: {cls.value}")
    return points


def branch_disagreement(up: Sequence[HysteresisPoint], down: Sequence[HysteresisPoint],
                        variable: str = "ar", rel_tol: float = 0.01) -> List[float]:
    """
    Parameter values where the up and down branches reach different attractors,
    judged by class or by the peak-value distributions.
    """
    by_value = {round(p.value, 12): p for p in down}
    disagree = []
    for a in up:
        b = by_value.get(round(a.value, 12))
        if b is None:
            continue
        if a.attractor_class != b.attractor_class:
            disagree.append(a.value)
            continue
        pa, pb = a.peaks[variable], b.peaks[variable]
        if a.attractor_class in STATIONARY or (pa.is_empty and pb.is_empty):
            scale = max(1.0, float(np.max(np.abs(a.final_state))), float(np.max(np.abs(b.final_state))))
            if np.max(np.abs(a.final_state - b.final_state)) > rel_tol * scale:
                disagree.append(a.value)
            continue
        if pa.is_empty or pb.is_empty:
            disagree.append(a.value)
            continue
        scale = max(float(np.max(np.abs(pa.values))), float(np.max(np.abs(pb.values))), 1e-300)
        if wasserstein_distance(pa.values, pb.values) > rel_tol * scale:
            disagree.append(a.value)
    return sorted(disagree)


def regime_onsets(points: Sequence[HysteresisPoint]) -> Dict[AttractorClass, float]:
    """First parameter value at which each attractor class appears along a sweep."""
    onsets: Dict[AttractorClass, float] = {}
    for point in points:
        onsets.setdefault(point.attractor_class, point.value)
    return onsets
