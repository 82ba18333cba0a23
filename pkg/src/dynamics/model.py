"""
Equations of motion of the driven cavity coupled to two mechanical resonators.

The six real equations are evaluated by the compiled kernels; this module
validates inputs and exposes the complex form used as an independent check.
"""

import cmath
import logging
import math
from typing import Tuple

import numpy as np

from src.dynamics import kernels
from src.exceptions import InvalidInputError
from src.models import SystemParams, as_state_array

logger = logging.getLogger(__name__)


def _check_params(params: SystemParams) -> None:
    if not isinstance(params, SystemParams):
        raise InvalidInputError(f"expected SystemParams, got {type(params).__name__}")


def rhs(state, params: SystemParams) -> np.ndarray:
    """
    Time derivative of the six real amplitudes.

    Args:
        state: StateVector or 6-sequence (ar, ai, b1r, b1i, b2r, b2i)
        params: Physical parameters; ``params.convention`` selects the sign convention

    Returns:
        Array of six derivatives in the same slot order
    """
    _check_params(params)
    y = as_state_array(state)
    out = np.empty(6)
    kernels.rhs_into(y, params.as_array(), params.is_verbatim, out)
    return out


def rhs_complex(alpha: complex, beta1: complex, beta2: complex,
                params: SystemParams) -> Tuple[complex, complex, complex]:
    """
    Derivatives of the complex amplitudes (alpha, beta1, beta2).

    This is the form the Rederived convention expands exactly.
    """
    _check_params(params)
    for value in (alpha, beta1, beta2):
        if not cmath.isfinite(value):
            raise InvalidInputError(f"non-finite amplitude {value}")

    phase = params.phase
    hop = complex(math.cos(phase), math.sin(phase))
    shift = params.g1 * (beta1.conjugate() + beta1) + params.g2 * (beta2.conjugate() + beta2)
    n = alpha.real ** 2 + alpha.imag ** 2

    d_alpha = ((1j * params.delta - params.kappa / 2) * alpha
               + 1j * shift * alpha
               + math.sqrt(params.kappa) * params.alpha_in)
    d_beta1 = (-(1j * params.omega1 + params.gamma1 / 2) * beta1
               - 1j * params.jm * hop * beta2
               - 1j * params.g1 * n)
    d_beta2 = (-(1j * params.omega2 + params.gamma2 / 2) * beta2
               - 1j * params.jm * hop.conjugate() * beta1
               - 1j * params.g2 * n)
    return d_alpha, d_beta1, d_beta2


def jacobian(state, params: SystemParams) -> np.ndarray:
    """Analytic 6x6 Jacobian of ``rhs`` at ``state``."""
    _check_params(params)
    y = as_state_array(state)
    out = np.empty((6, 6))
    kernels.jacobian_into(y, params.as_array(), params.is_verbatim, out)
    return out


def term_scale(state, params: SystemParams) -> float:
    """Magnitude of the largest individual term of the right-hand side at ``state``."""
    _check_params(params)
    return float(kernels.term_scale(as_state_array(state), params.as_array()))


def residual_norm(state, params: SystemParams) -> float:
    """Max-norm of rhs(state)."""
    return float(np.max(np.abs(rhs(state, params))))
