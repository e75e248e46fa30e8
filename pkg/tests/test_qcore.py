import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glq.qcore import (
    Polynomial,
    QDomainError,
    QParam,
    QPoleError,
    SeriesConvergenceError,
    jackson_factorial,
    jackson_integral,
    q_derivative,
    q_exp_inverse,
    q_exp_polynomial,
    q_exp_product,
    q_exp_series,
    q_factorial,
    q_factorials,
    q_number,
)


def brute_series(x, q, terms=60):
    """Plain left-to-right sum with factorials built from 1 + q + ... + q^(k-1)."""
    total, fact = 0.0, 1.0
    for k in range(terms):
        if k:
            fact *= sum(q**j for j in range(k))
        total += x**k / fact
    return total


def brute_product(x, q, factors=2000):
    out = 1.0
    for k in range(factors):
        out /= 1.0 - (1.0 - q) * q**k * x
    return out


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_qparam_rejects_outside_unit_interval(q):
    with pytest.raises(QDomainError, match=r"\(0, 1\)"):
        QParam(q)


def test_qparam_radius():
    assert QParam(0.5).radius == 2.0
    assert QParam(0.9).radius == pytest.approx(10.0)


def test_q_number_examples():
    assert q_number(0, 0.5) == 0.0
    assert q_number(1, 0.5) == pytest.approx(1.0, abs=1e-15)
    assert q_number(3, 0.5) == pytest.approx(1 + 0.5 + 0.25, abs=1e-15)


def test_q_number_near_one_keeps_digits():
    q = 1 - 1e-12
    assert q_number(5, q) == pytest.approx(5 - 10e-12, rel=1e-12)


def test_q_number_vectorised():
    m = np.arange(6)
    np.testing.assert_allclose(q_number(m, 0.3), [sum(0.3**j for j in range(k)) for k in m], atol=1e-15)


def test_q_factorial_examples():
    assert q_factorial(0, 0.5) == 1.0
    assert q_factorial(1, 0.5) == 1.0
    assert q_factorial(3, 0.5) == pytest.approx(2.625, abs=1e-15)
    np.testing.assert_allclose(q_factorials(5, 0.7), [q_factorial(k, 0.7) for k in range(6)], rtol=1e-15)


@pytest.mark.parametrize("m", [-1, 2.5])
def test_q_factorial_rejects_bad_argument(m):
    with pytest.raises(ValueError):
        q_factorial(m, 0.5)


def test_q_exp_series_examples():
    assert q_exp_series(0, 0.5) == 1.0
    assert abs(q_exp_series(1, 0.5, tol=1e-15) - brute_series(1.0, 0.5)) < 1e-12


def test_q_exp_series_near_radius_errors_and_names_radius():
    with pytest.raises(QDomainError, match="2"):
        q_exp_series(1.999, 0.5)
    with pytest.raises(SeriesConvergenceError):
        q_exp_series(1.999, 0.5)


def test_q_exp_series_outside_disc():
    with pytest.raises(QDomainError, match="domain"):
        q_exp_series(2.5, 0.5)
    with pytest.raises(QDomainError):
        q_exp_series(2.0j, 0.5)


def test_q_exp_product_examples():
    assert q_exp_product(0, 0.5) == 1.0
    assert abs(q_exp_product(1, 0.5) - q_exp_series(1, 0.5)) < 1e-12
    with pytest.raises(QPoleError):
        q_exp_product(2, 0.5)
    with pytest.raises(QPoleError):
        q_exp_product(4, 0.5)  # second pole, q^-1 / (1 - q)


def test_q_exp_product_matches_brute_product_beyond_radius():
    # the product continues exp_q past the disc of the series
    assert q_exp_product(3.0, 0.5) == pytest.approx(brute_product(3.0, 0.5), rel=1e-12)


def test_q_exp_inverse_vanishes_on_pole_and_is_vectorised():
    assert abs(q_exp_inverse(2.0, 0.5)) == 0.0
    x = np.array([0.1, 0.5, 1.5])
    np.testing.assert_allclose(q_exp_inverse(x, 0.5), [1 / brute_product(v, 0.5) for v in x], rtol=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
def test_series_product_and_recurrence_on_random_points(q):
    rng = np.random.default_rng(1234)
    R = 1 / (1 - q)
    r = 0.9 * R * np.sqrt(rng.random(200))
    x = r * np.exp(2j * np.pi * rng.random(200))
    worst_sp = worst_rec = 0.0
    for v in x:
        s = q_exp_series(v, q)
        worst_sp = max(worst_sp, abs(s - q_exp_product(v, q)) / max(1.0, abs(s)))
        lhs = q_exp_series(q * v, q)
        rhs = (1 - (1 - q) * v) * s
        worst_rec = max(worst_rec, abs(lhs - rhs) / max(1.0, abs(lhs)))
    assert worst_sp < 1e-12
    assert worst_rec < 1e-12


def test_q_to_one_reduces_to_exp():
    assert q_exp_series(0.7, 1 - 1e-9) == pytest.approx(math.exp(0.7), rel=1e-7)


@settings(max_examples=60, deadline=None)
@given(q=st.floats(0.05, 0.95), u=st.floats(-0.8, 0.8))
def test_recurrence_property(q, u):
    x = u / (1 - q)
    lhs = q_exp_series(q * x, q)
    rhs = (1 - (1 - q) * x) * q_exp_series(x, q)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


# polynomials and the q-derivative ---------------------------------------------


def test_polynomial_trims_and_degree():
    assert Polynomial((1, 2, 0, 0)).coefficients == (1, 2)
    assert Polynomial(()).degree == -1
    assert Polynomial.monomial(3).degree == 3
    p = Polynomial((1, 2))
    assert (p + Polynomial((0, 0, 3)))(2.0) == 1 + 4 + 12
    assert p.scale(2)(1.0) == 6
    assert p.dilate(3)(1.0) == 7


def test_q_derivative_examples():
    assert q_derivative(Polynomial((4.0,)), 0.5).degree == -1
    d = q_derivative(Polynomial.monomial(3), 0.5)
    assert d.coefficients == pytest.approx((0, 0, 1.75))


@settings(max_examples=40, deadline=None)
@given(
    q=st.floats(0.1, 0.9),
    coeffs=st.lists(st.floats(-3, 3), min_size=1, max_size=6),
    x=st.floats(0.2, 2.0),
)
def test_q_derivative_matches_difference_quotient(q, coeffs, x):
    f = Polynomial(tuple(coeffs))
    quotient = (f(x) - f(q * x)) / (x * (1 - q))
    assert abs(q_derivative(f, q)(x) - quotient) <= 1e-9 * (1 + sum(abs(c) for c in coeffs) * 2.0**6)


def test_q_derivative_of_truncated_exponential():
    q, t, deg = 0.5, 0.7, 12
    f = q_exp_polynomial(t, deg, q)
    expect = q_exp_polynomial(t, deg - 1, q).scale(t)
    np.testing.assert_allclose(q_derivative(f, q).coefficients, expect.coefficients, rtol=1e-14)


# Jackson integral ---------------------------------------------------------------


def test_jackson_examples():
    assert jackson_factorial(0, 0.5) == pytest.approx(1.0, abs=1e-10)
    assert jackson_factorial(3, 0.5) == pytest.approx(2.625, abs=1e-10)
    assert jackson_factorial(5, 0.9) == pytest.approx(q_factorial(5, 0.9), abs=1e-10)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
def test_jackson_factorial_table(q):
    for n in range(9):
        ref = q_factorial(n, q)
        assert abs(jackson_factorial(n, q) - ref) <= 1e-10 * ref


def test_jackson_integral_of_monomial_on_unit_interval():
    # int_0^1 x^2 d_q x = 1/[3]
    q = 0.6
    val = jackson_integral(lambda x: x**2, q, upper=1.0)
    assert val == pytest.approx(1 / q_number(3, q), rel=1e-12)


def test_jackson_inverts_q_derivative():
    q = 0.4
    f = Polynomial((0.0, 2.0, -1.0, 0.5))
    Df = q_derivative(f, q)
    assert jackson_integral(lambda x: Df(x).real, q, upper=1.5) == pytest.approx(f(1.5).real - f(0.0).real, rel=1e-12)


def test_jackson_matrix_valued_integrand():
    q = 0.5
    out = jackson_integral(lambda x: np.stack([x, x**2], axis=-1), q, upper=1.0)
    np.testing.assert_allclose(out, [1 / q_number(2, q), 1 / q_number(3, q)], rtol=1e-12)


def test_jackson_rejects_non_finite_integrand():
    with np.errstate(all="ignore"), pytest.raises(FloatingPointError):
        jackson_integral(lambda x: 1 / (x - x), 0.5, upper=1.0)
