"""Basis and Gauss-rule tests against brute-force integration oracles."""

import numpy as np
import pytest
from scipy.optimize import brentq

from fdeint import evaluate_basis, gauss_jacobi_rule, jacobi_recurrence

from conftest import weighted_inner_product, weighted_integral

ALPHAS = [0.1, 0.3, 0.5, 0.7, 0.9]


def test_alpha_domain_rejected():
    for bad in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValueError):
            jacobi_recurrence(bad, 5)
    with pytest.raises(ValueError):
        jacobi_recurrence(0.5, 0)


def test_first_polynomial_is_one():
    # unit-mass weight forces a constant first polynomial
    table = jacobi_recurrence(0.5, 8)
    for c in (0.0, 0.3, 1.0):
        assert evaluate_basis(table, 1, c) == pytest.approx([1.0], abs=0.0)


@pytest.mark.parametrize("alpha", [0.23, 0.5, 0.77])
def test_degree_one_shift_is_first_moment(alpha):
    # int_0^1 w(c) c dc = 1/(1+alpha) by the beta integral
    table = jacobi_recurrence(alpha, 4)
    assert table.a[0] == pytest.approx(1.0 / (1.0 + alpha), rel=1e-15)


def test_orthonormality_against_quadrature_oracle():
    table = jacobi_recurrence(0.3, 24)
    assert weighted_inner_product(table, 7, 7) == pytest.approx(1.0, abs=5e-13)
    assert weighted_inner_product(table, 3, 5) == pytest.approx(0.0, abs=5e-13)
    assert weighted_inner_product(table, 0, 1) == pytest.approx(0.0, abs=5e-13)


def test_basis_at_isolated_root():
    # a zero of P_2 located by sign change; the recurrence must vanish there
    table = jacobi_recurrence(0.5, 4)
    root = brentq(lambda c: evaluate_basis(table, 3, c)[2], 0.05, 0.55)
    assert abs(evaluate_basis(table, 3, root)[2]) < 1e-13


def test_discrete_orthonormality_of_columns():
    table = jacobi_recurrence(0.5, 24)
    rule = gauss_jacobi_rule(table, 22, 22)
    val = np.sum(rule.b * rule.P[:, 3] * rule.P[:, 5])
    assert abs(val) < 1e-13


def test_one_point_rule_is_first_moment():
    for alpha in (0.2, 0.5, 0.8):
        table = jacobi_recurrence(alpha, 3)
        rule = gauss_jacobi_rule(table, 1, 1)
        assert rule.c[0] == pytest.approx(1.0 / (1.0 + alpha), rel=1e-14)
        assert rule.b[0] == pytest.approx(1.0, abs=1e-14)


def test_weights_sum_to_one_at_22():
    table = jacobi_recurrence(0.5, 24)
    rule = gauss_jacobi_rule(table, 22, 22)
    assert abs(rule.b.sum() - 1.0) < 1e-14


def test_basis_matrix_identity_at_22():
    table = jacobi_recurrence(0.3, 24)
    rule = gauss_jacobi_rule(table, 22, 22)
    G = rule.P.T @ (rule.b[:, None] * rule.P)
    assert np.abs(G - np.eye(22)).max() < 1e-13


def test_nodes_are_zeros_of_next_polynomial():
    table = jacobi_recurrence(0.7, 24)
    rule = gauss_jacobi_rule(table, 22, 22)
    vals = evaluate_basis(table, 23, rule.c)[:, 22]
    assert np.abs(vals).max() < 1e-11


@pytest.mark.parametrize("alpha", ALPHAS)
def test_rule_wellposedness_across_orders(alpha):
    table = jacobi_recurrence(alpha, 32)
    for k in range(1, 31):
        rule = gauss_jacobi_rule(table, k, k)
        assert rule.c[0] > 0.0 and rule.c[-1] < 1.0
        assert np.all(np.diff(rule.c) > 0)
        assert np.all(rule.b > 0)
        assert abs(rule.b.sum() - 1.0) < 1e-13
        G = rule.P.T @ (rule.b[:, None] * rule.P)
        assert np.abs(G - np.eye(k)).max() < 1e-13


@pytest.mark.parametrize("k", [3, 9, 22])
def test_quadrature_exactness_on_random_polynomials(k, rng):
    # degree <= 2k-1 polynomials built in the orthonormal basis; the rule
    # must match adaptive brute-force integration of the weighted integrand
    alpha = 0.4
    table = jacobi_recurrence(alpha, 2 * k + 2)
    rule = gauss_jacobi_rule(table, k, k)
    for _ in range(2):
        coeffs = rng.standard_normal(2 * k)
        poly = lambda c: evaluate_basis(table, 2 * k, c) @ coeffs  # noqa: E731
        quad_val = np.sum(rule.b * np.array([poly(ci) for ci in rule.c]))
        oracle = weighted_integral(table, poly)
        assert quad_val == pytest.approx(oracle, rel=1e-12, abs=1e-12)


def test_rule_precondition_violations():
    table = jacobi_recurrence(0.5, 10)
    with pytest.raises(ValueError):
        gauss_jacobi_rule(table, 11, 5)
    with pytest.raises(ValueError):
        gauss_jacobi_rule(table, 5, 6)
    with pytest.raises(ValueError):
        evaluate_basis(table, 12, 0.5)
