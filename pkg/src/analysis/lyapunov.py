"""Largest Lyapunov exponent by periodic renormalisation (Benettin scheme)."""

import logging
import math

import numpy as np

from src.dynamics import kernels
from src.exceptions import InvalidInputError
from src.models import IntegrationConfig, LyapunovMethod, LyapunovResult, SystemParams, as_state_array

logger = logging.getLogger(__name__)

DISCARD_FRACTION = 0.25
SEPARATION = 1e-8
MIN_WINDOWS = 4


def _window_steps(renorm_interval: float, dt: float) -> int:
    steps = int(round(renorm_interval / dt))
    if steps < 1 or abs(steps * dt - renorm_interval) > 1e-9 * max(renorm_interval, dt):
        raise InvalidInputError(f"renorm_interval {renorm_interval} is not a multiple of dt {dt}")
    return steps


def summarize_exponents(local: np.ndarray, discard_fraction: float = DISCARD_FRACTION):
    """
    Mean, standard error and convergence flag of per-window exponents.

    The first ``discard_fraction`` of windows is dropped while the tangent
    direction aligns. Converged means the running mean moved by less than 20%
    of its magnitude, or less than 0.005, over the last quarter.
    """
    used = local[int(len(local) * discard_fraction):]
    if len(used) < 2:
        return float(np.mean(used)) if len(used) else float("nan"), 0.0, False
    mean = float(np.mean(used))
    stderr = float(np.std(used, ddof=1) / math.sqrt(len(used)))
    running = np.cumsum(used) / np.arange(1, len(used) + 1)
    drift = abs(running[-1] - running[(3 * len(running)) // 4])
    converged = bool(drift < 0.2 * abs(mean) or drift < 0.005)
    return mean, stderr, converged


def lyapunov_max(state0, params: SystemParams, config: IntegrationConfig,
                 renorm_interval: float = 1.0,
                 method: LyapunovMethod = LyapunovMethod.TANGENT,
                 discard_fraction: float = DISCARD_FRACTION,
                 separation: float = SEPARATION) -> LyapunovResult:
    """
    Estimate the largest Lyapunov exponent after ``config.t_transient``.

    The tangent method propagates a linearised perturbation with the analytic
    Jacobian; the two-trajectory method follows a neighbour at distance
    ``separation``. Both renormalise every ``renorm_interval``.
    """
    steps = _window_steps(renorm_interval, config.dt)
    n_windows = (config.n_steps - config.transient_steps) // steps
    if n_windows < MIN_WINDOWS:
        raise InvalidInputError(
            f"only {n_windows} renormalisation windows fit after the transient; need {MIN_WINDOWS}"
        )

    y = as_state_array(state0).copy()
    p = params.as_array()
    verbatim = params.is_verbatim
    bound = config.blow_up_bound
    diverged = LyapunovResult(renorm_interval=renorm_interval, method=method, diverged=True)

    if kernels.advance_kernel(y, p, verbatim, config.dt, config.transient_steps, bound) >= 0:
        logger.warning("Base trajectory diverged during the transient; no exponent")
        return diverged

    window_time = steps * config.dt
    local = np.empty(n_windows)
    direction = np.ones(6) / math.sqrt(6.0)

    if method == LyapunovMethod.TANGENT:
        v = direction.copy()
        for k in range(n_windows):
            if kernels.advance_tangent_kernel(y, v, p, verbatim, config.dt, steps, bound) >= 0:
                logger.warning(f"Base trajectory diverged in window {k}; no exponent")
                return diverged
            norm = float(np.linalg.norm(v))
            if not math.isfinite(norm) or norm == 0.0:
                logger.warning(f"Tangent vector degenerated in window {k}")
                return diverged
            local[k] = math.log(norm) / window_time
            v /= norm
    else:
        z = y + separation * direction
        for k in range(n_windows):
            if (kernels.advance_kernel(y, p, verbatim, config.dt, steps, bound) >= 0
                    or kernels.advance_kernel(z, p, verbatim, config.dt, steps, bound) >= 0):
                logger.warning(f"Trajectory pair diverged in window {k}; no exponent")
                return diverged
            delta = z - y
            norm = float(np.linalg.norm(delta))
            if norm == 0.0:
                local[k] = -math.inf
                z = y + separation * direction
                continue
            local[k] = math.log(norm / separation) / window_time
            z = y + delta * (separation / norm)
        if not np.all(np.isfinite(local)):
            logger.warning("Neighbour trajectory collapsed onto the base trajectory")
            local = local[np.isfinite(local)]

    lam, stderr, converged = summarize_exponents(local, discard_fraction)
    logger.debug(f"lambda_max={lam:.4g} +/- {stderr:.2g} over {n_windows} windows ({method.value})")
    return LyapunovResult(
        lambda_max=lam,
        stderr=stderr,
        renorm_interval=renorm_interval,
        converged=converged,
        n_windows=n_windows,
        method=method,
    )
