"""Fixed-step RK4 integration with transient handling and divergence detection."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.dynamics import kernels
from src.dynamics.model import rhs
from src.exceptions import DivergenceError, InvalidInputError
from src.models import VARIABLES, IntegrationConfig, SystemParams, as_state_array

logger = logging.getLogger(__name__)


class TerminationCause(str, Enum):
    COMPLETED = "completed"
    DIVERGENCE = "divergence"


@dataclass(frozen=True)
class Trajectory:
    """
    Recorded samples of one integration.

    ``times`` are integer multiples of ``config.sample_spacing``.
    ``transient_index`` is the first stored sample at or after ``t_transient``.
    """
    times: np.ndarray
    states: np.ndarray
    config: IntegrationConfig
    cause: TerminationCause = TerminationCause.COMPLETED
    transient_index: int = 0
    divergence_time: Optional[float] = None

    @property
    def terminated_early(self) -> bool:
        return self.cause != TerminationCause.COMPLETED

    @property
    def final_state(self) -> np.ndarray:
        """Last recorded sample; NaN when divergence struck before anything was kept."""
        if len(self.states) == 0:
            return np.full(6, np.nan)
        return self.states[-1]

    def post_transient(self) -> Tuple[np.ndarray, np.ndarray]:
        """Times and states from ``t_transient`` on."""
        return self.times[self.transient_index:], self.states[self.transient_index:]

    def series(self, variable: str) -> Tuple[np.ndarray, np.ndarray]:
        """Post-transient samples of one named component."""
        if variable not in VARIABLES:
            raise InvalidInputError(f"unknown variable '{variable}', expected one of {VARIABLES}")
        times, states = self.post_transient()
        return times, states[:, VARIABLES.index(variable)]


def rk4_step(state, dt: float, params: SystemParams, blow_up_bound: float = 1e12) -> np.ndarray:
    """
    One classical four-stage RK4 update.

    Raises:
        DivergenceError: if any component of the result leaves ``blow_up_bound``
    """
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    y = as_state_array(state)
    k1 = rhs(y, params)
    k2 = rhs(y + 0.5 * dt * k1, params)
    k3 = rhs(y + 0.5 * dt * k2, params)
    k4 = rhs(y + dt * k3, params)
    out = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.abs(out) <= blow_up_bound):
        raise DivergenceError(f"RK4 step left the blow-up bound {blow_up_bound:g}: {out}")
    return out


def integrate(state0, params: SystemParams, config: IntegrationConfig) -> Trajectory:
    """
    Integrate from ``state0`` over ``config.t_total``.

    Divergence does not raise: the returned trajectory is truncated at the
    last recorded finite sample and carries the divergence time.
    """
    y0 = as_state_array(state0)
    n_steps = config.n_steps
    stride = config.record_stride
    transient_steps = config.transient_steps
    first_kept = ((transient_steps + stride - 1) // stride) * stride
    skip = 0 if config.keep_transient else first_kept

    n_rows = n_steps // stride + 1
    samples = np.empty((n_rows, 6))
    rows, bad_step = kernels.integrate_kernel(
        y0, params.as_array(), params.is_verbatim, config.dt, n_steps, stride,
        config.blow_up_bound, skip, samples
    )

    start = 0 if config.keep_transient else first_kept // stride
    times = (np.arange(rows) + start) * config.sample_spacing
    transient_index = first_kept // stride if config.keep_transient else 0

    if bad_step >= 0:
        t_div = bad_step * config.dt
        logger.warning(f"Integration diverged at t={t_div:.6g} (bound {config.blow_up_bound:g})")
        return Trajectory(times, samples[:rows].copy(), config, TerminationCause.DIVERGENCE,
                          min(transient_index, rows), t_div)

    logger.debug(f"Integrated {n_steps} steps, {rows} samples kept")
    return Trajectory(times, samples[:rows].copy(), config, TerminationCause.COMPLETED, transient_index)
