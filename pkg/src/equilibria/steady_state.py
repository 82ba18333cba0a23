"""
Steady states of the optomechanical system.

Closed-form expressions (quadratic for the optical imaginary part, linear
mechanical response) give candidate states; a damped Newton search over a
deterministic seed lattice is the authority on which fixed points exist.
"""

import logging
import math
from typing import List, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from src.dynamics import kernels
from src.exceptions import InvalidInputError, SingularDenominatorError
from src.models import (
    FixedPoint,
    FixedPointSearch,
    FixedPointSource,
    QuadraticCoeffs,
    SystemParams,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
RELATIVE_RESIDUAL_TOL = 1e-13
DEDUP_TOL = 1e-6
MAX_NEWTON_ITER = 200
MAX_HALVINGS = 40
N_AMPLITUDES = 16
N_PHASES = 4


# ===== Closed-Form Expressions =====

def alpha_quadratic_coeffs(params: SystemParams) -> QuadraticCoeffs:
    """Coefficients of A0*ai^2 + A1*ai + A2 = 0, transcribed term by term in printed form."""
    w1, w2 = params.omega1, params.omega2
    k, d = params.kappa, params.delta
    g1, g2 = params.g1, params.g2
    y1, y2 = params.gamma1, params.gamma2
    j = params.jm
    c = math.cos(params.phase)
    ain2 = params.alpha_in ** 2

    a0 = 32.0 * ain2 * k * (
        c * g1 * g2 * j * (8 * j**2 + 2 * y1 * y2 - 8 * w1 * w2)
        - 4 * j**2 * g1**2 * w2 - 4 * j**2 * g2**2 * w1
        + g1**2 * y2**2 * w1 + 4 * g1**2 * w1 * w2**2
        + g2**2 * y1**2 * w2 + 4 * g2**2 * w1**2 * w2
    )
    a1 = -k ** 2.5 * (
        16 * j**2 + 8 * j**2 * y1 * y2 - 32 * j**2 * w1 * w2
        + y1**2 * y2**2 + 4 * y1**2 * w2**2 + 4 * y2**2 * w1**2
        + 16 * w1**2 * w2**2
    )
    # the printed bracket repeats and cancels some terms; kept as printed
    a2 = 4.0 * ain2 * (
        256 * j**3 * c * g1 * g2 * y1
        + 64 * j * c * g1 * g2 * y1 * y2 * k
        + 8 * d * j**2 * y1 * y2 * k
        - 32 * d * j**2 * w1 * w2 * k
        + d * y1**2 * y2**2 * k
        - 256 * j * c * g1 * g2 * w1 * w2 * k
        - 128 * j**2 * g1**2 * w2 * k
        + 128 * g2**2 * w2 * w1**2 * ain2
        - 128 * j**2 * g2**2 * w1 * k
        + 16 * d * j**4 * k
        - 8 * d * j**2 * y1 * y2 * k
        + 32 * d * g1**2 * w1 * w2**2 * ain2
        + 32 * g2**2 * y1**2 * w2 * ain2
        - 32 * d * j**2 * w1 * w2 * k
        + d * y1**2 * y2**2 * k
        + 4 * d * y1**2 * w2**2 * k
        + 4 * d * w1**2 * y2**2 * k
        + 16 * d * w1**2 * w2**2 * k
    )
    return QuadraticCoeffs(a0=a0, a1=a1, a2=a2)


def solve_quadratic(a0: float, a1: float, a2: float) -> List[float]:
    """Real roots of a0*x^2 + a1*x + a2 with the cancellation-free formula, ascending."""
    if a0 == 0.0:
        if a1 == 0.0:
            return [] if a2 != 0.0 else [0.0]
        return [-a2 / a1]
    disc = a1 * a1 - 4.0 * a0 * a2
    if disc < 0.0:
        return []
    if disc == 0.0:
        return [-a1 / (2.0 * a0)]
    q = -0.5 * (a1 + math.copysign(math.sqrt(disc), a1))
    return sorted({q / a0, a2 / q})


def solve_alpha(params: SystemParams) -> List[Tuple[float, float]]:
    """
    Closed-form optical steady-state candidates (ar, ai).

    ``ar`` is fixed at 2*alpha_in/sqrt(kappa); ``ai`` takes each real root of
    the quadratic. When every coefficient vanishes the origin is returned.
    """
    coeffs = alpha_quadratic_coeffs(params)
    ar = 2.0 * params.alpha_in / math.sqrt(params.kappa)
    if coeffs.a0 == 0.0 and coeffs.a1 == 0.0 and coeffs.a2 == 0.0:
        return [(ar, 0.0)]
    return [(ar, ai) for ai in solve_quadratic(coeffs.a0, coeffs.a1, coeffs.a2)]


def beta_steady(alpha_sq: float, params: SystemParams) -> Tuple[complex, complex]:
    """
    Mechanical steady amplitudes driven by intracavity intensity ``alpha_sq``.

    Raises:
        SingularDenominatorError: if the shared denominator vanishes
    """
    if not math.isfinite(alpha_sq) or alpha_sq < 0.0:
        raise InvalidInputError(f"alpha_sq must be finite and non-negative, got {alpha_sq}")
    w1, w2 = params.omega1, params.omega2
    y1, y2 = params.gamma1, params.gamma2
    j = params.jm
    hop = complex(math.cos(params.phase), math.sin(params.phase))

    den = 4 * j**2 - 4 * w1 * w2 + 2j * (y1 * w2 + y2 * w1) + y1 * y2
    if abs(den) < 1e-14:
        raise SingularDenominatorError(f"steady-state denominator vanishes (|den|={abs(den):.3e})")
    beta1 = -2.0 * (2 * params.g2 * j * hop + 1j * params.g1 * y2 - 2 * params.g1 * w2) * alpha_sq / den
    beta2 = -2.0 * (2 * params.g1 * j * hop.conjugate() + 1j * params.g2 * y1 - 2 * params.g2 * w1) * alpha_sq / den
    return beta1, beta2


# ===== Reduction to the Intracavity Intensity =====

def _mechanical_block(params: SystemParams) -> np.ndarray:
    jac = np.empty((6, 6))
    kernels.jacobian_into(np.zeros(6), params.as_array(), params.is_verbatim, jac)
    return jac[2:, 2:]


def mechanical_response(alpha_sq: float, params: SystemParams) -> np.ndarray:
    """
    Linear mechanical steady state (b1r, b1i, b2r, b2i) for a given intensity,
    in the active convention.
    """
    if params.is_verbatim:
        source = np.array([-params.g1, 0.0, -params.g2, 0.0])
    else:
        source = np.array([0.0, -params.g1, 0.0, -params.g2])
    try:
        unit = -np.linalg.solve(_mechanical_block(params), source)
    except np.linalg.LinAlgError as e:
        raise SingularDenominatorError(f"mechanical block is singular: {e}") from e
    return unit * alpha_sq


def _frequency_pull(params: SystemParams) -> float:
    """Optical detuning shift per unit intensity caused by the static mechanical displacement."""
    unit = mechanical_response(1.0, params)
    return -2.0 * (params.g1 * unit[0] + params.g2 * unit[2])


def intensity_polynomial(params: SystemParams) -> Polynomial:
    """
    Single polynomial in n = |alpha|^2 whose non-negative real roots are the
    intensities of all fixed points in the active convention.
    """
    pull = _frequency_pull(params)
    kappa = params.kappa
    drive = kappa * params.alpha_in ** 2
    n = Polynomial([0.0, 1.0])
    detuning = Polynomial([params.delta, -pull])
    if params.is_verbatim:
        return n * (kappa**2 / 2 - 2 * detuning**2) ** 2 - drive * (kappa**2 + 4 * detuning**2)
    return n * (kappa**2 / 4 + detuning**2) - drive


def _optical_states(alpha_sq: float, params: SystemParams) -> List[np.ndarray]:
    """Optical amplitudes consistent with intensity ``alpha_sq``."""
    d = params.delta - _frequency_pull(params) * alpha_sq
    half_k = params.kappa / 2
    sigma = 1.0 if params.is_verbatim else -1.0
    matrix = np.array([[-half_k, sigma * d], [d, -half_k]])
    rhs = np.array([-math.sqrt(params.kappa) * params.alpha_in, 0.0])
    if abs(np.linalg.det(matrix)) > 1e-12 * max(1.0, half_k**2 + d**2):
        return [np.linalg.solve(matrix, rhs)]
    # undriven resonance: any point on the null direction with the right norm
    null = np.array([1.0, d / half_k]) if half_k != 0 else np.array([0.0, 1.0])
    null *= math.sqrt(alpha_sq) / np.linalg.norm(null)
    return [null, -null]


def _state_from_optical(optical: np.ndarray, params: SystemParams) -> np.ndarray:
    alpha_sq = float(optical[0] ** 2 + optical[1] ** 2)
    return np.concatenate([optical, mechanical_response(alpha_sq, params)])


# ===== Newton Search =====

def _closed_form_seeds(params: SystemParams) -> List[np.ndarray]:
    seeds = []
    for ar, ai in solve_alpha(params):
        alpha_sq = ar * ar + ai * ai
        if not math.isfinite(alpha_sq):
            continue
        try:
            b1, b2 = beta_steady(alpha_sq, params)
        except SingularDenominatorError as e:
            logger.debug(f"Closed-form seed skipped: {e}")
            continue
        seeds.append(np.array([ar, ai, b1.real, b1.imag, b2.real, b2.imag]))
    return seeds


def _intensity_seeds(params: SystemParams) -> List[np.ndarray]:
    try:
        poly = intensity_polynomial(params)
    except SingularDenominatorError as e:
        logger.debug(f"Intensity seeds skipped: {e}")
        return []
    if np.all(poly.coef == 0.0):
        return []
    seeds = []
    for root in poly.trim().roots():
        if abs(root.imag) > 1e-6 * max(1.0, abs(root.real)) or root.real < -1e-12:
            continue
        alpha_sq = max(root.real, 0.0)
        for optical in _optical_states(alpha_sq, params):
            seeds.append(_state_from_optical(optical, params))
    return seeds


def _lattice_seeds(params: SystemParams, bound: float) -> List[np.ndarray]:
    """
    Deterministic amplitude-by-phase lattice; mechanics follow the optical intensity.

    The amplitudes span the intensity decades |alpha|^2 from 1 to ``bound``, so the
    largest optical amplitude is sqrt(bound). Seeds whose driven mechanics would
    exceed ``bound`` are discarded by ``_refine``.
    """
    amplitudes = np.logspace(0.0, 0.5 * math.log10(bound), N_AMPLITUDES)
    phases = np.arange(N_PHASES) * (2.0 * math.pi / N_PHASES)
    seeds = []
    for amp in amplitudes:
        for phi in phases:
            optical = np.array([amp * math.cos(phi), amp * math.sin(phi)])
            try:
                seeds.append(_state_from_optical(optical, params))
            except SingularDenominatorError:
                seeds.append(np.concatenate([optical, np.zeros(4)]))
    return seeds


def _is_duplicate(x: np.ndarray, y: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(y))))
    return float(np.max(np.abs(x - y))) <= DEDUP_TOL * scale


def _refine(seed: np.ndarray, p: np.ndarray, verbatim: bool, bound: float):
    """Run Newton from ``seed``; returns (state, residual, converged) or None."""
    y = seed.astype(np.float64).copy()
    if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > bound:
        return None
    try:
        status, _, residual = kernels.newton_kernel(
            y, p, verbatim, RESIDUAL_TOL, MAX_NEWTON_ITER, MAX_HALVINGS, bound
        )
    except Exception as e:  # singular Jacobian inside the compiled solve
        logger.debug(f"Newton aborted from seed {seed}: {e}")
        return None
    if status == 0:
        return y, residual, True
    if status in (1, 3) and residual <= RELATIVE_RESIDUAL_TOL * kernels.term_scale(y, p):
        return y, residual, False
    return None


def search_fixed_points(params: SystemParams, bound: float = 1e12) -> FixedPointSearch:
    """
    Multistart Newton search for every fixed point.

    Seeds come from the closed-form candidates, the real roots of the
    intensity polynomial and a 64-point amplitude/phase lattice. Roots are
    deduplicated, carry their Jacobian eigenvalues and are sorted by
    ascending intracavity intensity.
    """
    p = params.as_array()
    verbatim = params.is_verbatim
    families = [
        (FixedPointSource.CLOSED_FORM, _closed_form_seeds(params)),
        (FixedPointSource.INTENSITY, _intensity_seeds(params)),
        (FixedPointSource.MULTISTART, _lattice_seeds(params, bound)),
    ]

    found: List[FixedPoint] = []
    tried = converged = 0
    for source, seeds in families:
        for seed in seeds:
            tried += 1
            refined = _refine(seed, p, verbatim, bound)
            if refined is None:
                if source == FixedPointSource.CLOSED_FORM:
                    logger.debug(f"Closed-form candidate {seed[:2]} did not refine to a fixed point")
                continue
            converged += 1
            state, residual, ok = refined
            if source == FixedPointSource.CLOSED_FORM and not _is_duplicate(state, seed):
                logger.warning(
                    f"Closed-form candidate (ar={seed[0]:.6g}, ai={seed[1]:.6g}) refined to "
                    f"(ar={state[0]:.6g}, ai={state[1]:.6g}); distance {np.max(np.abs(state - seed)):.3e}"
                )
            duplicate = next((k for k, fp in enumerate(found) if _is_duplicate(fp.state, state)), None)
            if duplicate is not None and residual >= found[duplicate].residual_norm:
                continue
            jac = np.empty((6, 6))
            kernels.jacobian_into(state, p, verbatim, jac)
            point = FixedPoint(state, residual, np.linalg.eigvals(jac), source, ok)
            if duplicate is None:
                found.append(point)
            else:
                found[duplicate] = FixedPoint(state, residual, point.eigenvalues, found[duplicate].source, ok)

    found.sort(key=lambda fp: fp.intensity)
    logger.debug(f"{len(found)} fixed points from {tried} seeds ({converged} converged)")
    return FixedPointSearch(points=found, seeds_tried=tried, seeds_converged=converged)


def find_fixed_points(params: SystemParams, bound: float = 1e12) -> List[FixedPoint]:
    """All distinct fixed points, lowest intensity first."""
    return search_fixed_points(params, bound).points


def count_steady_states(params: SystemParams) -> int:
    """Number of distinct fixed points."""
    return len(find_fixed_points(params))


def count_closed_form(params: SystemParams) -> int:
    """Number of closed-form optical candidates: 0, 1 or 2 real roots of the printed quadratic."""
    return len(solve_alpha(params))
