"""__init__.py for equilibria package."""

from src.equilibria.steady_state import (
    alpha_quadratic_coeffs,
    solve_alpha,
    beta_steady,
    mechanical_response,
    intensity_polynomial,
    search_fixed_points,
    find_fixed_points,
    count_steady_states,
    count_closed_form,
)
from src.equilibria.stability import (
    CharPoly6,
    char_poly_from_jacobian,
    routh_array,
    routh_hurwitz,
    eigen_stability,
    classify_fixed_point,
    stability_threshold,
    threshold_errors,
)

__all__ = [
    'alpha_quadratic_coeffs',
    'solve_alpha',
    'beta_steady',
    'mechanical_response',
    'intensity_polynomial',
    'search_fixed_points',
    'find_fixed_points',
    'count_steady_states',
    'count_closed_form',
    'CharPoly6',
    'char_poly_from_jacobian',
    'routh_array',
    'routh_hurwitz',
    'eigen_stability',
    'classify_fixed_point',
    'stability_threshold',
    'threshold_errors',
]
