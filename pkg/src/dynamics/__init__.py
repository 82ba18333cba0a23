"""__init__.py for dynamics package."""

from src.dynamics.model import rhs, rhs_complex, jacobian, residual_norm, term_scale
from src.dynamics.integrator import Trajectory, TerminationCause, rk4_step, integrate

__all__ = [
    'rhs',
    'rhs_complex',
    'jacobian',
    'residual_norm',
    'term_scale',
    'Trajectory',
    'TerminationCause',
    'rk4_step',
    'integrate',
]
