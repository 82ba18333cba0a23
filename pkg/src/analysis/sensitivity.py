"""Parameter sensitivity of the Lyapunov exponent and analytical-vs-numerical error rows."""

import logging
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from src.analysis.attractors import classify_attractor
from src.analysis.lyapunov import lyapunov_max
from src.analysis.peaks import local_maxima
from src.analysis.convergence import convergence_check
from src.dynamics.integrator import integrate
from src.equilibria.stability import classify_fixed_point
from src.equilibria.steady_state import find_fixed_points
from src.exceptions import DivergenceError, InvalidInputError
from src.models import AttractorClass, IntegrationConfig, SystemParams, physical_parameter_names

logger = logging.getLogger(__name__)


class SensitivityEntry(BaseModel):
    parameter: str
    base_value: float
    lambda_base: float
    lambda_minus: Optional[float] = None
    lambda_plus: Optional[float] = None
    relative_change: Optional[float] = Field(None, description="Largest change of lambda_max, percent of |lambda_base|")


class ErrorAnalysisRow(BaseModel):
    """Linear-stability prediction next to the simulated outcome at one parameter point."""
    jm: float
    delta: float
    alpha_in: float
    analytical_stable: Optional[bool] = Field(None, description="Lower-branch verdict; None without fixed points")
    agreement_methods: Optional[bool] = None
    numerical_stable: bool
    attractor_class: AttractorClass
    lambda_max: Optional[float] = None
    step_deviation: Optional[float] = None

    @property
    def consistent(self) -> Optional[bool]:
        if self.analytical_stable is None:
            return None
        return self.analytical_stable == self.numerical_stable


def parameter_sensitivity(state0, params: SystemParams, config: IntegrationConfig,
                          names: Sequence[str] = ("jm", "delta", "alpha_in"),
                          rel_step: float = 0.01, renorm_interval: float = 1.0) -> List[SensitivityEntry]:
    """Change of lambda_max under +/- ``rel_step`` relative perturbations of each parameter."""
    base = lyapunov_max(state0, params, config, renorm_interval)
    if base.lambda_max is None:
        raise DivergenceError("base run diverged; sensitivity undefined")

    entries = []
    for name in names:
        if name not in physical_parameter_names():
            raise InvalidInputError(f"unknown parameter '{name}'")
        value = getattr(params, name)
        shifted = {}
        for label, factor in (("minus", 1.0 - rel_step), ("plus", 1.0 + rel_step)):
            result = lyapunov_max(state0, params.with_updates(**{name: value * factor}), config, renorm_interval)
            shifted[label] = result.lambda_max
        changes = [abs(v - base.lambda_max) for v in shifted.values() if v is not None]
        relative = None
        if changes and base.lambda_max != 0.0:
            relative = 100.0 * max(changes) / abs(base.lambda_max)
        entries.append(SensitivityEntry(
            parameter=name,
            base_value=value,
            lambda_base=base.lambda_max,
            lambda_minus=shifted["minus"],
            lambda_plus=shifted["plus"],
            relative_change=relative,
        ))
        logger.info(f"Sensitivity of lambda_max to {name}: {relative}")
    return entries


def error_analysis_row(params: SystemParams, config: IntegrationConfig,
                       renorm_interval: float = 1.0, check_steps: bool = True) -> ErrorAnalysisRow:
    """
    Compare the linear verdict on the lowest-intensity fixed point with the
    attractor reached from the all-zero state.
    """
    points = find_fixed_points(params)
    analytical = agreement = None
    if points:
        verdict = classify_fixed_point(points[0].state, params)
        analytical, agreement = verdict.stable, verdict.agreement

    ic = np.zeros(6)
    traj = integrate(ic, params, config)
    lyap = None if traj.terminated_early else lyapunov_max(ic, params, config, renorm_interval)
    cls = classify_attractor(traj, local_maxima(traj, "ar"), lyap)

    deviation = None
    if check_steps and not traj.terminated_early:
        try:
            deviation = convergence_check(ic, params, config).max_deviation
        except DivergenceError as e:
            logger.warning(f"Step-halving check failed: {e}")

    if analytical is not None and analytical != (cls == AttractorClass.FIXED_POINT):
        logger.warning(
            f"Linear stability ({analytical}) and simulation ({cls.value}) disagree at "
            f"jm={params.jm}, delta={params.delta}, alpha_in={params.alpha_in}"
        )
    return ErrorAnalysisRow(
        jm=params.jm,
        delta=params.delta,
        alpha_in=params.alpha_in,
        analytical_stable=analytical,
        agreement_methods=agreement,
        numerical_stable=cls == AttractorClass.FIXED_POINT,
        attractor_class=cls,
        lambda_max=lyap.lambda_max if lyap else None,
        step_deviation=deviation,
    )
