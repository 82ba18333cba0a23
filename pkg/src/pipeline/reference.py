"""
Published operating points and the behaviour quoted for each.

Every check runs one operating point in one convention and reports whether
the quoted behaviour appears there. The values the verdict was taken from
are kept on the result, and checks that do not reproduce are logged as
warnings with those values.
"""

import logging
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.analysis.attractors import bistability_probe
from src.analysis.convergence import convergence_check
from src.analysis.hysteresis import branch_disagreement, hysteresis_sweep, regime_onsets
from src.analysis.lyapunov import lyapunov_max
from src.analysis.sensitivity import error_analysis_row
from src.equilibria.stability import classify_fixed_point
from src.equilibria.steady_state import find_fixed_points
from src.exceptions import DivergenceError, InvalidInputError
from src.models import (
    AttractorClass,
    Convention,
    CountMethod,
    GridAxis,
    GridSpec,
    IntegrationConfig,
    SweepDirection,
    SweepTask,
    SystemParams,
)
from src.pipeline.sweep import steady_state_map, two_state_fraction

logger = logging.getLogger(__name__)


# ===== Operating Points =====

ROW_ALPHA_IN = 1e3
# (jm, delta) -> linear verdict on the lower branch
STABILITY_ROWS: Dict[Tuple[float, float], bool] = {(0.02, -2.0): True, (0.07, -1.0): False, (0.08, 0.0): False}
# linear verdict stable, simulation not stationary
DISPUTED_ROWS: Tuple[Tuple[float, float], ...] = ((0.05, -1.5), (0.10, 1.0))

CHAOTIC_POINT = {"delta": -1.6, "jm": 0.02, "alpha_in": 1e4}
QUASI_PERIODIC_POINT = {"delta": 0.75, "jm": 0.02, "alpha_in": 1e4}
BISTABLE_POINT = {"delta": -3.0, "jm": 0.55, "alpha_in": 1e3}
BISTABLE_IC = (-1.096, 0.0, -0.8734, 0.0, 0.0, 0.0)
CHAIN_POINT = {"delta": -3.0, "jm": 0.02}

THRESHOLD_DRIVES = (1.0e3, 1.2e3)
CHAOS_MIN_LAMBDA = 0.03
QUASI_MAX_LAMBDA = 0.02
MAX_STEP_DEVIATION = 0.005
HYSTERESIS_RANGE = (0.4, 0.65)
HYSTERESIS_POINTS = 26
# bistable windows [0.42, 0.60] with 0.05 slack on each edge
HYSTERESIS_WINDOW = (0.37, 0.65)
CHAIN_RANGE = (500.0, 1500.0)
CHAIN_POINTS = 11
CHAIN_ONSETS = (800.0, 1100.0)
CHAIN_TOLERANCE = 0.3

OSCILLATING = (AttractorClass.PERIODIC, AttractorClass.QUASI_PERIODIC)


class ReferenceCheck(BaseModel):
    """Outcome of one operating point in one convention."""
    name: str
    convention: Convention
    expected: str
    reproduced: bool
    observed: Dict[str, Any] = Field(default_factory=dict, description="Values the verdict was taken from")

    @property
    def diagnostic(self) -> str:
        return "; ".join(f"{key}={_text(value)}" for key, value in self.observed.items())


def _text(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _report(check: ReferenceCheck) -> ReferenceCheck:
    if check.reproduced:
        logger.info(f"{check.name} [{check.convention.value}] reproduced: {check.diagnostic}")
    else:
        logger.warning(
            f"{check.name} [{check.convention.value}] not reproduced: expected {check.expected}; "
            f"observed {check.diagnostic}"
        )
    return check


def _params(convention: Convention, **changes) -> SystemParams:
    return SystemParams(convention=convention).with_updates(**changes)


# ===== Checks =====

def default_count_grid(convention: Convention, count_method: CountMethod = CountMethod.CLOSED_FORM) -> GridSpec:
    """The 101 x 101 (delta, jm) window of the steady-state maps."""
    return GridSpec(
        x=GridAxis(name="delta", min=-3.0, max=3.0, n=101),
        y=GridAxis(name="jm", min=0.0, max=0.1, n=101),
        base=SystemParams(convention=convention),
        task=SweepTask.COUNT,
        count_method=count_method,
    )


def check_two_state_threshold(convention: Convention, config: Optional[IntegrationConfig] = None,
                              workers: int = 1, grid: Optional[GridSpec] = None) -> List[ReferenceCheck]:
    """Two-state region present at the lower drive and gone at the upper one."""
    grid = grid or default_count_grid(convention)
    base = grid.base.with_updates(convention=convention)
    lo, hi = THRESHOLD_DRIVES
    fractions = []
    for alpha_in in (lo, hi):
        shifted = grid.model_copy(update={"base": base.with_updates(alpha_in=alpha_in)})
        fractions.append(two_state_fraction(steady_state_map(shifted, workers)))
    return [_report(ReferenceCheck(
        name="two-state threshold",
        convention=convention,
        expected=f"two-state fraction > 0 at alpha_in={lo:g} and 0 at {hi:g}",
        reproduced=fractions[0] > 0.0 and fractions[1] == 0.0,
        observed={"count_method": grid.count_method, "fraction_lo": fractions[0], "fraction_hi": fractions[1]},
    ))]


def check_stability_rows(convention: Convention, config: Optional[IntegrationConfig] = None,
                         workers: int = 1) -> List[ReferenceCheck]:
    """Linear verdict on the lowest-intensity fixed point at each undisputed row."""
    checks = []
    for (jm, delta), stable in STABILITY_ROWS.items():
        params = _params(convention, jm=jm, delta=delta, alpha_in=ROW_ALPHA_IN)
        points = find_fixed_points(params)
        observed: Dict[str, Any] = {"n_fixed_points": len(points), "stable": None, "max_real_part": None}
        if points:
            verdict = classify_fixed_point(points[0].state, params)
            observed.update(stable=verdict.stable, max_real_part=verdict.max_real_part)
        checks.append(_report(ReferenceCheck(
            name=f"stability row jm={jm:g} delta={delta:g}",
            convention=convention,
            expected="stable" if stable else "unstable",
            reproduced=observed["stable"] is stable,
            observed=observed,
        )))
    return checks


def check_disputed_rows(convention: Convention, config: Optional[IntegrationConfig] = None,
                        workers: int = 1) -> List[ReferenceCheck]:
    """Rows where the linear verdict is stable but the run does not settle."""
    config = config or IntegrationConfig()
    checks = []
    for jm, delta in DISPUTED_ROWS:
        params = _params(convention, jm=jm, delta=delta, alpha_in=ROW_ALPHA_IN)
        row = error_analysis_row(params, config, check_steps=False)
        checks.append(_report(ReferenceCheck(
            name=f"disputed row jm={jm:g} delta={delta:g}",
            convention=convention,
            expected="linearly stable, not a fixed point in simulation",
            reproduced=row.analytical_stable is True and not row.numerical_stable,
            observed={"analytical_stable": row.analytical_stable, "class": row.attractor_class,
                      "lambda_max": row.lambda_max},
        )))
    return checks


def check_chaotic_point(convention: Convention, config: Optional[IntegrationConfig] = None,
                        workers: int = 1) -> List[ReferenceCheck]:
    config = config or IntegrationConfig()
    result = lyapunov_max(np.zeros(6), _params(convention, **CHAOTIC_POINT), config)
    return [_report(ReferenceCheck(
        name="chaotic point",
        convention=convention,
        expected=f"lambda_max > {CHAOS_MIN_LAMBDA}",
        reproduced=result.lambda_max is not None and result.lambda_max > CHAOS_MIN_LAMBDA,
        observed={"lambda_max": result.lambda_max, "converged": result.converged, "diverged": result.diverged},
    ))]


def check_quasi_periodic_point(convention: Convention, config: Optional[IntegrationConfig] = None,
                               workers: int = 1) -> List[ReferenceCheck]:
    """Near-zero exponent and a step-halving deviation within tolerance."""
    config = config or IntegrationConfig()
    params = _params(convention, **QUASI_PERIODIC_POINT)
    result = lyapunov_max(np.zeros(6), params, config)
    deviation = None
    if result.lambda_max is not None:
        try:
            deviation = convergence_check(np.zeros(6), params, config).max_deviation
        except DivergenceError as e:
            logger.debug(f"Step-halving run diverged: {e}")
    reproduced = (
        result.lambda_max is not None and abs(result.lambda_max) <= QUASI_MAX_LAMBDA
        and deviation is not None and deviation <= MAX_STEP_DEVIATION
    )
    return [_report(ReferenceCheck(
        name="quasi-periodic point",
        convention=convention,
        expected=f"|lambda_max| <= {QUASI_MAX_LAMBDA}, step deviation <= {MAX_STEP_DEVIATION}",
        reproduced=reproduced,
        observed={"lambda_max": result.lambda_max, "diverged": result.diverged, "step_deviation": deviation},
    ))]


def check_coexisting_attractors(convention: Convention, config: Optional[IntegrationConfig] = None,
                                workers: int = 1) -> List[ReferenceCheck]:
    """Two initial conditions reach different attractors, and up/down sweeps of jm disagree."""
    config = config or IntegrationConfig()
    params = _params(convention, **BISTABLE_POINT)
    report = bistability_probe(params, BISTABLE_IC, np.zeros(6), config, with_lyapunov=False)
    up = hysteresis_sweep(params, "jm", HYSTERESIS_RANGE, HYSTERESIS_POINTS, SweepDirection.UP, config)
    down = hysteresis_sweep(params, "jm", HYSTERESIS_RANGE, HYSTERESIS_POINTS, SweepDirection.DOWN, config)
    lo, hi = HYSTERESIS_WINDOW
    in_window = [v for v in branch_disagreement(up, down) if lo <= v <= hi]
    return [_report(ReferenceCheck(
        name="coexisting attractors",
        convention=convention,
        expected=f"different attractors from both initial conditions; branches disagree within [{lo}, {hi}]",
        reproduced=report.same_attractor is False and bool(in_window),
        observed={"class_ic": report.class_a, "class_origin": report.class_b, "distance": report.distance,
                  "threshold": report.threshold, "disagreements": len(in_window)},
    ))]


def chain_verdict(onsets: Mapping[AttractorClass, float]) -> Tuple[bool, Optional[float], Optional[float], Optional[float]]:
    """
    Whether fixed point, oscillation and chaos set in that order near the quoted drives.

    Returns the verdict with the three onsets (None where a regime never appears).
    """
    still = onsets.get(AttractorClass.FIXED_POINT)
    moving = min((onsets[c] for c in OSCILLATING if c in onsets), default=None)
    chaos = onsets.get(AttractorClass.CHAOTIC)
    if still is None or moving is None or chaos is None:
        return False, still, moving, chaos
    near = all(abs(value - target) <= CHAIN_TOLERANCE * target
               for value, target in zip((moving, chaos), CHAIN_ONSETS))
    return still < moving < chaos and near, still, moving, chaos


def check_transition_chain(convention: Convention, config: Optional[IntegrationConfig] = None,
                           workers: int = 1) -> List[ReferenceCheck]:
    config = config or IntegrationConfig()
    points = hysteresis_sweep(_params(convention, **CHAIN_POINT), "alpha_in", CHAIN_RANGE, CHAIN_POINTS,
                              SweepDirection.UP, config, compute_lyapunov=True)
    reproduced, still, moving, chaos = chain_verdict(regime_onsets(points))
    return [_report(ReferenceCheck(
        name="transition chain",
        convention=convention,
        expected=f"fixed point, then oscillation near {CHAIN_ONSETS[0]:g}, then chaos near {CHAIN_ONSETS[1]:g}",
        reproduced=reproduced,
        observed={"fixed_point_onset": still, "oscillation_onset": moving, "chaos_onset": chaos,
                  "classes": "/".join(p.attractor_class.value for p in points)},
    ))]


CHECKS: Dict[str, Callable[..., List[ReferenceCheck]]] = {
    "threshold": check_two_state_threshold,
    "rows": check_stability_rows,
    "disputed": check_disputed_rows,
    "chaotic": check_chaotic_point,
    "quasi-periodic": check_quasi_periodic_point,
    "coexisting": check_coexisting_attractors,
    "chain": check_transition_chain,
}


def run_reference_checks(names: Optional[Sequence[str]] = None,
                         conventions: Sequence[Convention] = (Convention.PAPER_VERBATIM, Convention.REDERIVED),
                         config: Optional[IntegrationConfig] = None, workers: int = 1) -> List[ReferenceCheck]:
    """Run the named checks (all by default) in every convention."""
    names = list(names) if names else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise InvalidInputError(f"unknown reference check(s) {unknown}; choose from {list(CHECKS)}")
    results = []
    for name in names:
        for convention in conventions:
            results.extend(CHECKS[name](Convention(convention), config, workers))
    reproduced = sum(c.reproduced for c in results)
    logger.info(f"Reference checks: {reproduced} of {len(results)} reproduced")
    return results
