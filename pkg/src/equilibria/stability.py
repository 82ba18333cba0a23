"""
Linear stability of fixed points.

The characteristic polynomial is built from the Jacobian by the
Faddeev-LeVerrier trace recursion and tested with the Routh-Hurwitz array;
direct eigenvalues cross-check every verdict and win on disagreement.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from src.dynamics.model import jacobian, rhs, term_scale
from src.equilibria.steady_state import find_fixed_points
from src.exceptions import InvalidInputError, NotAFixedPointError
from src.models import (
    RouthHurwitzOutcome,
    StabilityMethod,
    StabilityVerdict,
    SystemParams,
    as_state_array,
    physical_parameter_names,
)

logger = logging.getLogger(__name__)

ROUTH_EPS = 1e-12
MARGINAL_TOL = 1e-9
FIXED_POINT_TOL = 1e-6


@dataclass(frozen=True)
class CharPoly6:
    """Monic characteristic polynomial lambda^n + c1 lambda^(n-1) + ... + cn."""
    coefficients: Tuple

    @property
    def degree(self) -> int:
        return len(self.coefficients)

    def monic(self) -> np.ndarray:
        """Coefficients highest power first, as floats."""
        return np.array([1.0, *(float(c) for c in self.coefficients)])

    def roots(self) -> np.ndarray:
        return np.roots(self.monic())

    def __call__(self, x):
        return np.polyval(self.monic(), x)


class RouthArray(NamedTuple):
    table: np.ndarray
    sign_changes: int
    marginal: bool


class EigenStability(NamedTuple):
    eigenvalues: np.ndarray
    max_real_part: float
    stable: bool


def char_poly_from_jacobian(J) -> CharPoly6:
    """
    Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion.

    Works on float arrays and on object arrays of ``fractions.Fraction``,
    where the result is exact.
    """
    A = np.asarray(J)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {A.shape}")
    if A.dtype != object and not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    n = A.shape[0]
    if A.dtype == object:
        identity = np.array([[1 if i == j else 0 for j in range(n)] for i in range(n)], dtype=object)
    else:
        identity = np.eye(n)

    coefficients = []
    c = 1
    M = np.zeros_like(A)
    for k in range(1, n + 1):
        M = A @ M + c * identity
        c = -np.trace(A @ M) / k
        coefficients.append(c)
    return CharPoly6(tuple(coefficients))


def routh_array(p: CharPoly6, eps: float = ROUTH_EPS) -> RouthArray:
    """
    Build the Routh array of a monic polynomial.

    A vanishing pivot is replaced by ``eps`` times the first-column scale and
    a vanishing row by the derivative of its auxiliary polynomial; both mark
    the result as marginal. ``sign_changes`` counts right-half-plane roots.
    """
    coeffs = p.monic()
    if not np.all(np.isfinite(coeffs)):
        raise InvalidInputError(f"non-finite polynomial coefficients {coeffs}")
    n = len(coeffs) - 1
    width = n // 2 + 1
    table = np.zeros((n + 1, width))
    table[0, :len(coeffs[0::2])] = coeffs[0::2]
    table[1, :len(coeffs[1::2])] = coeffs[1::2]

    marginal = False
    for i in range(2, n + 2):
        scale = max(float(np.max(np.abs(table[:i, 0]))), 1.0)
        tiny = eps * scale
        prev = table[i - 1]
        if np.all(np.abs(prev) <= tiny):
            marginal = True
            order = n - (i - 2)
            powers = np.maximum(order - 2 * np.arange(width), 0)
            prev[:] = table[i - 2] * powers
        if abs(prev[0]) <= tiny:
            marginal = True
            prev[0] = tiny
        if i > n:
            break
        prev2 = table[i - 2]
        for j in range(width - 1):
            table[i, j] = (prev[0] * prev2[j + 1] - prev2[0] * prev[j + 1]) / prev[0]

    first = table[:, 0]
    signs = np.sign(first[first != 0.0])
    sign_changes = int(np.sum(signs[1:] != signs[:-1]))
    return RouthArray(table, sign_changes, marginal)


def routh_hurwitz(p: CharPoly6) -> RouthHurwitzOutcome:
    """Stable iff every first-column entry of the Routh array is positive."""
    arr = routh_array(p)
    if arr.sign_changes > 0:
        return RouthHurwitzOutcome.UNSTABLE
    if arr.marginal:
        return RouthHurwitzOutcome.MARGINAL
    return RouthHurwitzOutcome.STABLE


def eigen_stability(J) -> EigenStability:
    A = np.asarray(J, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.all(np.isfinite(A)):
        raise InvalidInputError("expected a finite square matrix")
    eigenvalues = np.linalg.eigvals(A)
    max_real = float(np.max(eigenvalues.real))
    return EigenStability(eigenvalues, max_real, max_real < 0.0)


def classify_fixed_point(fp_state, params: SystemParams, residual_tol: float = FIXED_POINT_TOL) -> StabilityVerdict:
    """
    Stability of a fixed point by both methods.

    Raises:
        NotAFixedPointError: if the rhs residual at ``fp_state`` is too large
    """
    y = as_state_array(fp_state)
    residual = float(np.max(np.abs(rhs(y, params))))
    tolerance = max(residual_tol, 1e-13 * term_scale(y, params))
    if residual > tolerance:
        raise NotAFixedPointError(residual, tolerance)

    J = jacobian(y, params)
    routh = routh_hurwitz(char_poly_from_jacobian(J))
    eig = eigen_stability(J)
    marginal = abs(eig.max_real_part) < MARGINAL_TOL or routh == RouthHurwitzOutcome.MARGINAL
    if routh == RouthHurwitzOutcome.MARGINAL:
        agreement = abs(eig.max_real_part) < MARGINAL_TOL
    else:
        agreement = bool(routh) == eig.stable
    if not agreement:
        logger.warning(
            f"Routh-Hurwitz ({routh.value}) and eigenvalues (max re {eig.max_real_part:.3e}) disagree "
            f"at state {y.tolist()} with params {params.model_dump()}"
        )
    return StabilityVerdict(
        stable=eig.stable,
        method=StabilityMethod.BOTH,
        max_real_part=eig.max_real_part,
        agreement=agreement,
        marginal=marginal,
        routh=routh,
    )


def _lower_branch_stable(params: SystemParams) -> Optional[bool]:
    points = find_fixed_points(params)
    if not points:
        return None
    return points[0].stable


def stability_threshold(params: SystemParams, parameter: str, lo: float, hi: float,
                        tol: float = 1e-6, max_iter: int = 60) -> Optional[float]:
    """
    Bisect ``parameter`` for the value where the lower-branch fixed point
    changes stability. Returns None when the endpoints agree or either has
    no fixed point.
    """
    if parameter not in physical_parameter_names():
        raise InvalidInputError(f"unknown parameter '{parameter}'")
    verdict_lo = _lower_branch_stable(params.with_updates(**{parameter: lo}))
    verdict_hi = _lower_branch_stable(params.with_updates(**{parameter: hi}))
    if verdict_lo is None or verdict_hi is None or verdict_lo == verdict_hi:
        return None
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        verdict = _lower_branch_stable(params.with_updates(**{parameter: mid}))
        if verdict is None:
            logger.warning(f"No fixed point at {parameter}={mid}; threshold search stopped")
            return None
        if verdict == verdict_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_errors(x_numerical: float, x_analytical: float) -> Tuple[float, float]:
    """Absolute error and relative error in percent of a stability threshold."""
    if x_analytical == 0.0:
        raise InvalidInputError("analytical threshold must be non-zero for a relative error")
    absolute = abs(x_numerical - x_analytical)
    return absolute, 100.0 * absolute / abs(x_analytical)
