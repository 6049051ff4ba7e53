import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crgreen.quadric import elementary_symmetric, elementary_symmetric_from_eigenvalues, levi_matrix, levi_spectrum
from crgreen.scalar import (A_grad, A_hess, A_value, B_from_spectrum, B_product, F_series, IntegrandContext,
                            abs_matrix, basis_change_eigen_sum, basis_change_rA, bl_identity_sides, dr_over_r,
                            f_factor, f_of_s, g_factor, lambda_matrix, matrix_r_power, matrix_r_power_expm,
                            minor_det, r_of_s, s_substitution)
from crgreen.validation import example_quadric

from conftest import random_unit

EXAMPLES = ["12.1", "12.2", "12.3", "12.5(b=0.1)"]


def test_f_and_g_values():
    assert f_factor(0.5, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert g_factor(0.5, 1.0) == pytest.approx(2.0, rel=1e-15)
    assert f_factor(0.3, -1.7) == pytest.approx(g_factor(0.3, 1.7), rel=1e-12)
    with pytest.raises(ValueError):
        f_factor(0.5, 0.0)


def test_s_substitution():
    assert s_substitution(0.5) == pytest.approx(3.0)
    assert r_of_s(1.0) == 0.0
    assert r_of_s(s_substitution(0.9)) == pytest.approx(0.9, abs=1e-14)
    # Jacobian of dr/r against a central difference in s
    s, h = 7.0, 1e-5
    num = (math.log(r_of_s(s + h)) - math.log(r_of_s(s - h))) / (2 * h)
    assert dr_over_r(s) == pytest.approx(num, rel=1e-8)
    with pytest.raises(ValueError):
        s_substitution(1.0)


def test_series_low_orders():
    tab = F_series(4)
    assert tab.coefficients[0] == (Fraction(-1, 3), Fraction(1, 3))
    assert tab.coefficients[1] == (Fraction(-4, 45), Fraction(5, 45), Fraction(-1, 45))
    assert tab.format_poly(1) == "(u^2 - 1)/3"
    assert tab.format_poly(2) == "-(u^4 - 5*u^2 + 4)/45"
    with pytest.raises(ValueError):
        F_series(21)


def test_series_vanishes_at_unit_u():
    tab = F_series(12)
    for k in range(1, 7):
        assert tab.p(k, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert tab.F(5.0, 1.0) == pytest.approx(2.0, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(20.0, 1e4), st.floats(-3.0, 3.0).filter(lambda u: abs(u) > 1e-3))
def test_series_against_direct(s, u):
    tab = F_series(12)
    direct = f_of_s(s, u)
    assert tab.F(s, u) == pytest.approx(float(direct), rel=1e-10, abs=1e-10)


def test_f_of_s_crossover_continuity():
    # both branches agree at the crossover point
    tab = F_series(8)
    for u in (0.5, 1.3, -2.0):
        s = 1e6
        direct = float(f_factor(None, u, log_r=math.log1p(-2 / (s + 1))))
        assert tab.F(s, u) == pytest.approx(direct, rel=1e-12)
        assert float(f_of_s(2 * s, u)) == pytest.approx(float(tab.F(2 * s, u)), rel=1e-15)


def test_B_product_examples(ex1):
    ctx = IntegrandContext(ex1, [0.0, 1.0], 0.5, np.array([1, 0]), np.zeros(2))
    assert B_product(ctx) == pytest.approx(2.0, rel=1e-14)
    assert B_product(ctx, (1,)) == pytest.approx(4.0, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6), st.integers(0, 2 ** 16))
def test_B_positive(r, seed):
    Q = example_quadric("12.5(b=0.1)")
    rng = np.random.default_rng(seed)
    mu = levi_spectrum(Q, random_unit(rng, 4)).eigenvalues
    for L in [(), (1, 2), (2, 4), (1, 2, 3, 4)]:
        assert B_from_spectrum(mu, math.log(r), L) > 0


def test_matrix_powers(ex1, ex5, rng):
    np.testing.assert_allclose(matrix_r_power(ex1, [0, 1], 0.25), np.diag([4, 0.25]), atol=1e-14)
    for _ in range(10):
        nu, r = random_unit(rng, 4), rng.uniform(0.01, 0.99)
        P = matrix_r_power(ex5, nu, r)
        np.testing.assert_allclose(P @ np.linalg.inv(P), np.eye(4), atol=1e-10)
        np.testing.assert_allclose(matrix_r_power_expm(ex5, nu, r), P, atol=1e-9 * np.abs(P).max())


def test_abs_matrix(ex1, ex5, rng):
    for _ in range(5):
        np.testing.assert_allclose(abs_matrix(ex1, random_unit(rng, 2)), np.eye(2), atol=1e-12)
    M = abs_matrix(ex5, [0, 0, 0, 1])
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(M)), [1, 1, 1.1, 1.1], atol=1e-10)
    nu = random_unit(rng, 4)
    A = levi_matrix(ex5, nu)
    np.testing.assert_allclose(abs_matrix(ex5, nu) @ abs_matrix(ex5, nu), A @ A, atol=1e-10)


def test_lambda_matrix(ex1, ex5, rng):
    r = 0.37
    np.testing.assert_allclose(lambda_matrix(ex1, random_unit(rng, 2), r), (1 + r) / (1 - r) * np.eye(2),
                               atol=1e-12)
    nu = random_unit(rng, 4)
    np.testing.assert_allclose(lambda_matrix(ex5, nu, 1e-8), abs_matrix(ex5, nu), atol=1e-6)
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    ctx = IntegrandContext(ex5, nu, r, z, np.zeros(4))
    assert A_value(ctx) == pytest.approx(np.vdot(z, lambda_matrix(ex5, nu, r) @ z).real, rel=1e-12)
    assert np.all(np.linalg.eigvalsh(lambda_matrix(ex5, nu, r)) > 0)


def test_A_value_example(ex1):
    z = np.array([0.6, 0.8j])
    ctx = IntegrandContext(ex1, [0.6, 0.8], 0.5, z, np.zeros(2))
    assert A_value(ctx) == pytest.approx(3.0, rel=1e-14)


def test_A_derivatives_fd(ex5, rng):
    nu, r = random_unit(rng, 4), 0.4
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    ctx = IntegrandContext(ex5, nu, r, z, np.zeros(4))
    grad = A_grad(ctx)
    h = 1e-5
    for k in range(4):
        e = np.zeros(4, dtype=complex)
        e[k] = 1
        ax = (A_value(IntegrandContext(ex5, nu, r, z + h * e, ctx.t))
              - A_value(IntegrandContext(ex5, nu, r, z - h * e, ctx.t))) / (2 * h)
        ay = (A_value(IntegrandContext(ex5, nu, r, z + 1j * h * e, ctx.t))
              - A_value(IntegrandContext(ex5, nu, r, z - 1j * h * e, ctx.t))) / (2 * h)
        assert abs(0.5 * (ax - 1j * ay) - grad[k]) <= 1e-7 * np.abs(grad).max()
    H = A_hess(ctx)
    # A is the Hermitian form z^* M z with M = H^T
    np.testing.assert_allclose(np.vdot(z, H.T @ z).real, A_value(ctx), rtol=1e-12)
    np.testing.assert_allclose(H, H.conj().T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(H) > 0)


def test_minor_det():
    I = np.eye(3)
    assert minor_det(I, (1, 2), (1, 2)) == 1
    assert minor_det(I, (1, 2), (1, 3)) == 0
    assert minor_det(I, (), ()) == 1
    M = np.arange(16).reshape(4, 4) + 1j * np.eye(4)
    sub = M[np.ix_([0, 2], [1, 3])]
    assert minor_det(M, (1, 3), (2, 4)) == pytest.approx(sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0])
    with pytest.raises(ValueError):
        minor_det(I, (1,), (4,))


def test_basis_change_top_degree_and_limit(ex3, rng):
    nu = random_unit(rng, 4)
    top = basis_change_rA(ex3, nu, 0.3, (1, 2, 3, 4))
    assert top[(1, 2, 3, 4)] == pytest.approx(1.0, abs=1e-12)
    near1 = basis_change_rA(ex3, nu, 1 - 1e-8, (1, 3))
    for J, v in near1.entries.items():
        assert abs(v - (1.0 if J == (1, 3) else 0.0)) <= 1e-5


def test_basis_change_eigen_sum(ex3, rng):
    for K in [(1,), (2, 4), (1, 2, 3)]:
        nu, r = random_unit(rng, 4), rng.uniform(0.05, 0.95)
        np.testing.assert_allclose(basis_change_eigen_sum(ex3, nu, r, K).vector(),
                                   basis_change_rA(ex3, nu, r, K).vector(), atol=1e-9)


@pytest.mark.parametrize("ex", EXAMPLES)
def test_structural_identities(ex):
    Q = example_quadric(ex)
    rng = np.random.default_rng(7)
    for _ in range(20):
        nu = random_unit(rng, Q.codim)
        z = rng.standard_normal(Q.dim_z) + 1j * rng.standard_normal(Q.dim_z)
        spec = levi_spectrum(Q, nu)
        Z = spec.unitary.conj().T @ z
        A = levi_matrix(Q, nu)
        for coeffs in ([0, 0, 1], [4, 0, -5, 0, 1]):
            lhs = np.sum(np.polynomial.polynomial.polyval(spec.eigenvalues, coeffs) * np.abs(Z) ** 2)
            P = sum(c * np.linalg.matrix_power(A, k) for k, c in enumerate(coeffs))
            rhs = np.vdot(z, P @ z)
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))
        np.testing.assert_allclose(elementary_symmetric(Q, nu),
                                   elementary_symmetric_from_eigenvalues(spec.eigenvalues), atol=1e-10)


def test_b_analytic_across_crossing(ex5):
    # B is a symmetric function of |mu|, so it stays smooth where eigenvalues cross near nu_4 = 0
    s = np.linspace(-0.05, 0.05, 201)
    nus = np.stack([np.cos(s), np.zeros_like(s), np.zeros_like(s), np.sin(s)], axis=1)
    vals = np.array([B_from_spectrum(levi_spectrum(ex5, nu).eigenvalues, math.log(0.3)) for nu in nus])
    second = np.diff(vals, 2) / (s[1] - s[0]) ** 2
    assert np.all(np.isfinite(second)) and np.max(np.abs(second)) < 1e2


def test_small_r_bound(ex5):
    mu = levi_spectrum(ex5, [0.2, 0.5, -0.3, 0.78]).eigenvalues
    rs = np.array([1e-2, 1e-3, 1e-4])
    vals = np.array([B_from_spectrum(mu, math.log(r)) / r for r in rs])
    slope = np.polyfit(np.log(rs), np.log(vals), 1)[0]
    c0 = mu[mu > 0].sum()
    assert slope == pytest.approx(c0 - 1, abs=1e-2)


@pytest.mark.parametrize("ex", ["12.1", "12.3"])
def test_bl_identity(ex, rng):
    Q = example_quadric(ex)
    nu, r = random_unit(rng, Q.codim), 0.42
    for q in range(1, Q.dim_z):
        left, right = bl_identity_sides(Q, nu, r, tuple(range(1, q + 1)))
        np.testing.assert_allclose(left.vector(), right.vector(), atol=1e-9 * right.norm())
