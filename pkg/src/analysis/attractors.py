"""
Attractor classification, bistability probes and hidden-attractor detection.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import directed_hausdorff, pdist

from src.analysis.lyapunov import lyapunov_max
from src.analysis.peaks import PeakSet, local_maxima
from src.dynamics.integrator import Trajectory, integrate
from src.dynamics.model import jacobian
from src.models import (
    AttractorClass,
    BistabilityReport,
    FixedPoint,
    IntegrationConfig,
    SystemParams,
    as_state_array,
)

logger = logging.getLogger(__name__)

MAX_CLUSTERS = 16
CLUSTER_REL_GAP = 1e-3
CHAOS_THRESHOLD = 0.02
FIXED_POINT_DRIFT = 1e-6
# relative floor where 1e-6 is below double resolution of the state
DRIFT_RESOLUTION = 1e-12
OSCILLATION_FLOOR = 1e-6
SAME_ATTRACTOR_FRACTION = 0.01
CLOUD_POINTS = 2000
DISTANCE_FLOOR = 1e-6
FIXED_POINT_MATCH = 1e-4
DIAMETER_POINTS = 500

# (ar, ai) and (b1r, b1i) projections
PROJECTIONS = ((0, 1), (2, 3))


def peak_clusters(values: np.ndarray, rel_gap: float = CLUSTER_REL_GAP) -> List[Tuple[float, float]]:
    """Group sorted peak values wherever consecutive gaps exceed ``rel_gap`` of their scale."""
    if len(values) == 0:
        return []
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    scale = max(float(np.max(np.abs(ordered))), 1e-300)
    breaks = np.nonzero(np.diff(ordered) > rel_gap * scale)[0]
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [len(ordered) - 1]])
    return [(float(ordered[s]), float(ordered[e])) for s, e in zip(starts, ends)]


def terminal_drift(trajectory: Trajectory) -> float:
    """Max absolute deviation from the final state over the last tenth of the run."""
    times, states = trajectory.times, trajectory.states
    window = states[times >= times[-1] - 0.1 * trajectory.config.t_total]
    return float(np.max(np.abs(window - states[-1])))


def drift_threshold(trajectory: Trajectory) -> float:
    """FIXED_POINT_DRIFT in state units, raised only where the final state is too large to resolve it."""
    return max(FIXED_POINT_DRIFT, DRIFT_RESOLUTION * float(np.max(np.abs(trajectory.states[-1]))))


def classify_attractor(trajectory: Trajectory, peaks: PeakSet, lyap=None,
                       max_clusters: int = MAX_CLUSTERS,
                       cluster_rel_gap: float = CLUSTER_REL_GAP,
                       chaos_threshold: float = CHAOS_THRESHOLD) -> AttractorClass:
    """
    Decide the dynamical regime of one run.

    Order of checks: divergence, terminal drift (fixed point), oscillation
    amplitude, Lyapunov convergence and sign, then peak-value clustering.
    With ``lyap`` None the chaos test is skipped.
    """
    if trajectory.terminated_early or (lyap is not None and lyap.diverged):
        return AttractorClass.DIVERGED
    if terminal_drift(trajectory) < drift_threshold(trajectory):
        return AttractorClass.FIXED_POINT

    _, series = trajectory.series(peaks.variable)
    _, states = trajectory.post_transient()
    scale = max(1.0, float(np.max(np.abs(states))))
    if peaks.is_empty or np.ptp(series) < OSCILLATION_FLOOR * scale:
        return AttractorClass.NO_OSCILLATION

    if lyap is not None:
        if not lyap.converged:
            return AttractorClass.UNCLASSIFIABLE
        if lyap.lambda_max > chaos_threshold:
            return AttractorClass.CHAOTIC

    clusters = peak_clusters(peaks.values, cluster_rel_gap)
    width_limit = cluster_rel_gap * max(float(np.max(np.abs(peaks.values))), 1e-300)
    if len(clusters) <= max_clusters and all(hi - lo <= width_limit for lo, hi in clusters):
        return AttractorClass.PERIODIC
    return AttractorClass.QUASI_PERIODIC


# ===== Attractor Comparison =====

def attractor_cloud(trajectory: Trajectory, max_points: int = CLOUD_POINTS) -> np.ndarray:
    """Evenly thinned post-transient states."""
    _, states = trajectory.post_transient()
    if len(states) > max_points:
        states = states[:: int(np.ceil(len(states) / max_points))]
    return states


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def _diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    if len(points) > DIAMETER_POINTS:
        points = points[:: int(np.ceil(len(points) / DIAMETER_POINTS))]
    return float(np.max(pdist(points)))


def attractor_distance(cloud_a: np.ndarray, cloud_b: np.ndarray) -> Tuple[float, float]:
    """
    Symmetric Hausdorff distance over the optical and first mechanical
    projections, and the same-attractor threshold (1% of the larger diameter).
    """
    distance = 0.0
    diameter = 0.0
    for i, j in PROJECTIONS:
        a, b = cloud_a[:, [i, j]], cloud_b[:, [i, j]]
        distance = max(distance, _hausdorff(a, b))
        diameter = max(diameter, _diameter(a), _diameter(b))
    scale = max(1.0, float(np.max(np.abs(cloud_a))), float(np.max(np.abs(cloud_b))))
    threshold = max(SAME_ATTRACTOR_FRACTION * diameter, DISTANCE_FLOOR * scale)
    return distance, threshold


@dataclass(frozen=True)
class AttractorSignature:
    """What is kept of a completed run to match it against other attractors."""
    attractor_class: AttractorClass
    cloud: np.ndarray
    final_state: np.ndarray

    @classmethod
    def from_trajectory(cls, trajectory: Trajectory, attractor_class: AttractorClass) -> "AttractorSignature":
        return cls(attractor_class, attractor_cloud(trajectory), trajectory.final_state.copy())


def compare_signatures(sig_a: AttractorSignature, sig_b: AttractorSignature) -> Tuple[float, float, bool]:
    """
    Distance, threshold and same-attractor verdict for two completed runs.

    Two fixed-point attractors are compared by their final states, anything
    else by the Hausdorff distance of the post-transient clouds.
    """
    if sig_a.attractor_class == AttractorClass.FIXED_POINT and sig_b.attractor_class == AttractorClass.FIXED_POINT:
        a, b = sig_a.final_state, sig_b.final_state
        scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        distance = float(np.max(np.abs(a - b)))
        threshold = FIXED_POINT_MATCH * scale
    else:
        distance, threshold = attractor_distance(sig_a.cloud, sig_b.cloud)
    return distance, threshold, distance <= threshold


def bistability_probe(params: SystemParams, ic_a, ic_b, config: IntegrationConfig,
                      with_lyapunov: bool = True, renorm_interval: float = 1.0,
                      variable: str = "ar") -> BistabilityReport:
    """Integrate from two initial conditions and compare the attractors reached."""
    branches = []
    for ic in (ic_a, ic_b):
        y0 = as_state_array(ic)
        traj = integrate(y0, params, config)
        lyap = None
        if with_lyapunov and not traj.terminated_early:
            lyap = lyapunov_max(y0, params, config, renorm_interval)
        cls = classify_attractor(traj, local_maxima(traj, variable), lyap)
        branches.append((traj, cls, lyap))

    (traj_a, cls_a, lyap_a), (traj_b, cls_b, lyap_b) = branches
    report = dict(
        class_a=cls_a,
        class_b=cls_b,
        lambda_a=lyap_a.lambda_max if lyap_a else None,
        lambda_b=lyap_b.lambda_max if lyap_b else None,
        diverged_a=traj_a.terminated_early,
        diverged_b=traj_b.terminated_early,
    )
    if not (traj_a.terminated_early or traj_b.terminated_early):
        distance, threshold, same = compare_signatures(
            AttractorSignature.from_trajectory(traj_a, cls_a),
            AttractorSignature.from_trajectory(traj_b, cls_b),
        )
        report.update(distance=distance, threshold=threshold, same_attractor=same)
        logger.info(f"Attractor distance {distance:.4g} (threshold {threshold:.4g}): {cls_a.value} vs {cls_b.value}")
    return BistabilityReport(**report)


def hidden_attractor(trajectory: Trajectory, attractor_class: AttractorClass,
                     fixed_points: Sequence[FixedPoint], params: SystemParams,
                     config: IntegrationConfig, kick: float = 1e-3) -> bool:
    """
    Whether an oscillating attractor is hidden.

    Self-excited attractors are reached from a small kick off an unstable
    fixed point along its leading unstable eigenvector. An attractor with no
    fixed points, or with only stable ones, is hidden by construction.
    """
    if attractor_class in (AttractorClass.DIVERGED, AttractorClass.FIXED_POINT,
                           AttractorClass.NO_OSCILLATION, AttractorClass.UNCLASSIFIABLE):
        return False
    unstable = [fp for fp in fixed_points if not fp.stable]
    if not unstable:
        return True

    cloud = attractor_cloud(trajectory)
    for fp in unstable:
        eigenvalues, vectors = np.linalg.eig(jacobian(fp.state, params))
        lead = vectors[:, int(np.argmax(eigenvalues.real))].real
        norm = np.linalg.norm(lead)
        if norm == 0.0:
            lead = vectors[:, int(np.argmax(eigenvalues.real))].imag
            norm = np.linalg.norm(lead)
        size = kick * max(1.0, float(np.max(np.abs(fp.state))))
        for sign in (1.0, -1.0):
            nudged = integrate(fp.state + sign * size * lead / norm, params, config)
            if nudged.terminated_early:
                continue
            distance, threshold = attractor_distance(cloud, attractor_cloud(nudged))
            if distance <= threshold:
                logger.debug(f"Attractor is self-excited from fixed point with |alpha|^2={fp.intensity:.4g}")
                return False
    return True
