from fractions import Fraction

import numpy as np
import pytest

from src.dynamics import jacobian
from src.equilibria import (
    CharPoly6,
    char_poly_from_jacobian,
    classify_fixed_point,
    eigen_stability,
    find_fixed_points,
    routh_array,
    routh_hurwitz,
    stability_threshold,
    threshold_errors,
)
from src.exceptions import InvalidInputError, NotAFixedPointError
from src.models import RouthHurwitzOutcome, SystemParams


def poly_with_roots(roots):
    return CharPoly6(tuple(np.real(np.poly(roots))[1:]))


def test_char_poly_of_diagonal_matrix():
    p = char_poly_from_jacobian(np.diag([-1.0, -2.0]))
    assert p.coefficients == pytest.approx((3.0, 2.0))
    assert p.degree == 2


def test_char_poly_is_exact_on_fractions():
    A = np.array([[Fraction(1, 2), Fraction(1, 3)], [Fraction(-1, 5), Fraction(2, 7)]], dtype=object)
    p = char_poly_from_jacobian(A)
    assert p.coefficients == (-(Fraction(1, 2) + Fraction(2, 7)),
                              Fraction(1, 2) * Fraction(2, 7) + Fraction(1, 3) * Fraction(1, 5))


def test_char_poly_of_negative_identity():
    p = char_poly_from_jacobian(-np.eye(6))
    assert p.coefficients == pytest.approx((6.0, 15.0, 20.0, 15.0, 6.0, 1.0))
    assert p.degree == 6


def test_first_coefficient_is_total_damping():
    params = SystemParams(g1=0.0, g2=0.0, jm=0.0, alpha_in=0.0)
    p = char_poly_from_jacobian(jacobian(np.zeros(6), params))
    assert p.coefficients[0] == pytest.approx(2 * 1.077e-5 + 7.3e-2, rel=1e-12)
    assert p.coefficients[0] == pytest.approx(0.0730215, rel=1e-6)


def test_eigenvalue_product_is_determinant(kerr_params):
    for fp in find_fixed_points(kerr_params):
        J = jacobian(fp.state, kerr_params)
        assert np.prod(fp.eigenvalues).real == pytest.approx(np.linalg.det(J), rel=1e-6)
        assert abs(np.prod(fp.eigenvalues).imag) <= 1e-6 * abs(np.linalg.det(J))


def test_char_poly_roots_are_eigenvalues(rng):
    A = rng.normal(size=(6, 6))
    roots = np.sort_complex(char_poly_from_jacobian(A).roots())
    assert np.allclose(roots, np.sort_complex(np.linalg.eigvals(A)), atol=1e-8)


def test_routh_on_known_polynomials():
    assert routh_hurwitz(poly_with_roots([-1.0] * 6)) == RouthHurwitzOutcome.STABLE
    assert routh_hurwitz(poly_with_roots([-1 + 2j, -1 - 2j, -0.5, -3.0, -0.1 + 1j, -0.1 - 1j])) == RouthHurwitzOutcome.STABLE

    unstable = routh_array(poly_with_roots([1.0] + [-1.0] * 5))
    assert unstable.sign_changes == 1
    assert routh_hurwitz(poly_with_roots([1.0] + [-1.0] * 5)) == RouthHurwitzOutcome.UNSTABLE
    assert routh_array(poly_with_roots([0.5 + 1j, 0.5 - 1j, -1.0, -2.0, -3.0, -4.0])).sign_changes == 2


@pytest.mark.parametrize("roots", [
    [1j, -1j, -1.0, -1.0, -1.0, -1.0],
    [0.0, -1.0, -1.0, -1.0, -1.0, -1.0],
])
def test_routh_marks_imaginary_axis_roots_marginal(roots):
    outcome = routh_hurwitz(poly_with_roots(roots))
    assert outcome == RouthHurwitzOutcome.MARGINAL
    assert not outcome


def test_routh_agrees_with_eigenvalues_on_random_matrices(rng):
    checked = 0
    while checked < 1000:
        A = rng.normal(size=(6, 6)) - rng.uniform(0.0, 4.0) * np.eye(6)
        max_real = np.max(np.linalg.eigvals(A).real)
        if abs(max_real) < 1e-2:
            continue
        outcome = routh_hurwitz(char_poly_from_jacobian(A))
        assert bool(outcome) == (max_real < 0.0)
        checked += 1


def test_kerr_branches(kerr_params):
    lower, middle, _ = find_fixed_points(kerr_params)

    verdict = classify_fixed_point(middle.state, kerr_params)
    assert not verdict.stable
    assert verdict.routh == RouthHurwitzOutcome.UNSTABLE
    assert verdict.agreement

    verdict = classify_fixed_point(lower.state, kerr_params)
    assert verdict.stable
    assert verdict.routh == RouthHurwitzOutcome.STABLE
    assert verdict.max_real_part < 0.0


def test_undriven_origin_is_stable(rederived_params):
    verdict = classify_fixed_point(np.zeros(6), rederived_params.with_updates(alpha_in=0.0))
    assert verdict.stable
    assert verdict.agreement
    assert verdict.max_real_part == pytest.approx(-rederived_params.gamma1 / 2, rel=1e-6)


def test_classify_rejects_non_fixed_points(kerr_params):
    with pytest.raises(NotAFixedPointError):
        classify_fixed_point(np.ones(6), kerr_params)


def test_verdicts_respect_phase_symmetries(kerr_params):
    base = kerr_params.with_updates(jm=0.05, theta=0.7)
    verdicts = {}
    for theta in (0.7, 0.7 + 2 * np.pi, -0.7):
        points = find_fixed_points(base.with_updates(theta=theta))
        verdicts[theta] = [fp.stable for fp in points]
    assert verdicts[0.7] == verdicts[0.7 + 2 * np.pi]
    assert verdicts[0.7] == verdicts[-0.7]


def test_stability_threshold_of_printed_optical_block():
    # printed equations: the undriven origin loses stability once |delta| exceeds kappa / 2
    params = SystemParams(kappa=0.5, g1=0.0, g2=0.0, jm=0.0, alpha_in=0.0, gamma1=0.1, gamma2=0.1)
    value = stability_threshold(params, "delta", 0.0, 0.9, tol=1e-7)
    assert value == pytest.approx(0.25, abs=1e-5)


def test_stability_threshold_without_flip(damped_params):
    assert stability_threshold(damped_params, "delta", -1.0, 1.0) is None
    with pytest.raises(InvalidInputError):
        stability_threshold(damped_params, "nope", 0.0, 1.0)


def test_threshold_errors():
    absolute, relative = threshold_errors(1.1, 1.0)
    assert absolute == pytest.approx(0.1)
    assert relative == pytest.approx(10.0)
    with pytest.raises(InvalidInputError):
        threshold_errors(1.0, 0.0)


def test_eigen_stability():
    result = eigen_stability(np.diag([-1.0, -2.0, -0.5]))
    assert result.max_real_part == pytest.approx(-0.5)
    assert result.stable
    assert not eigen_stability(np.array([[0.0, 1.0], [1.0, 0.0]])).stable
    with pytest.raises(InvalidInputError):
        eigen_stability(np.ones((2, 3)))
    with pytest.raises(InvalidInputError):
        eigen_stability(np.array([[np.nan]]))
