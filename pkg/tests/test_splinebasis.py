"""Tests for the uniform B-spline basis module."""

import numpy as np
import pytest

from randseries import oracle
from randseries.errors import ConfigError
from randseries.splinebasis import (basis_integrals, basis_with_dim,
                                    dense_matrix, eval_basis, eval_basis_many,
                                    eval_scaled_many, gram_matrix,
                                    least_squares_fit, make_basis, make_scaled)


class TestConstruction:
    def test_dimension_formula(self):
        assert make_basis(3, 5).J == 7
        assert make_basis(1, 4).J == 4
        assert make_basis(2, 1).J == 2

    def test_rejects_degenerate_orders(self):
        with pytest.raises(ConfigError):
            make_basis(0, 5)
        with pytest.raises(ConfigError):
            make_basis(3, 0)

    def test_knots_clamped_and_uniform(self):
        b = make_basis(3, 4)
        np.testing.assert_allclose(b.knots[:3], 0.0)
        np.testing.assert_allclose(b.knots[-3:], 1.0)
        np.testing.assert_allclose(b.knots[3:6], [0.25, 0.5, 0.75])

    def test_basis_with_dim(self):
        assert basis_with_dim(3, 7).K == 5
        with pytest.raises(ConfigError):
            basis_with_dim(3, 2)


class TestEvaluation:
    def test_order_one_is_histogram(self):
        b = make_basis(1, 4)
        first, vals = eval_basis(b, 0.30)
        assert first == 1
        np.testing.assert_allclose(vals, [1.0])

    def test_boundary_interpolation(self):
        b = make_basis(2, 2)
        first, vals = eval_basis(b, 0.0)
        assert first == 0
        np.testing.assert_allclose(vals, [1.0, 0.0])

    def test_right_endpoint_uses_closed_interval(self):
        b = make_basis(3, 5)
        first, vals = eval_basis(b, 1.0)
        assert first == 4
        np.testing.assert_allclose(vals.sum(), 1.0)
        np.testing.assert_allclose(vals[-1], 1.0)

    def test_linear_pair_on_single_interval(self):
        b = make_basis(2, 1)
        for x in (0.0, 0.25, 0.8, 1.0):
            _, vals = eval_basis(b, x)
            np.testing.assert_allclose(vals, [1.0 - x, x], atol=1e-15)

    def test_matches_naive_recursion(self):
        b = make_basis(3, 5)
        ref = oracle.naive_basis_row(b, 0.5)
        np.testing.assert_allclose(dense_matrix(b, [0.5])[0], ref, atol=1e-12)

    def test_matches_naive_recursion_many_points(self):
        rng = np.random.default_rng(11)
        for q, k in ((1, 3), (2, 5), (3, 4), (4, 7)):
            b = make_basis(q, k)
            xs = np.append(rng.random(8), [0.0, 1.0, 0.5])
            got = dense_matrix(b, xs)
            ref = np.array([oracle.naive_basis_row(b, float(x)) for x in xs])
            np.testing.assert_allclose(got, ref, atol=1e-12)

    def test_partition_of_unity_and_nonnegativity(self):
        rng = np.random.default_rng(0)
        xs = rng.random(2000)
        for q in (1, 2, 3, 4):
            for k in (1, 2, 5, 17, 40):
                _, vals = eval_basis_many(make_basis(q, k), xs)
                assert np.max(np.abs(vals.sum(axis=1) - 1.0)) < 1e-12
                assert vals.min() >= 0.0

    def test_at_most_q_consecutive_nonzeros(self):
        b = make_basis(3, 6)
        first, vals = eval_basis_many(b, np.linspace(0, 1, 101))
        assert vals.shape[1] == b.q
        assert np.all(first >= 0) and np.all(first + b.q <= b.J)

    def test_rejects_points_outside_domain(self):
        b = make_basis(2, 3)
        with pytest.raises(ConfigError):
            eval_basis(b, -0.01)
        with pytest.raises(ConfigError):
            eval_basis(b, 1.01)


class TestIntegrals:
    def test_closed_form_q3_k5(self):
        got = basis_integrals(make_basis(3, 5))
        want = np.array([1, 2, 3, 3, 3, 2, 1]) / 15.0
        np.testing.assert_allclose(got, want, atol=1e-15)

    def test_histogram_bins(self):
        got = basis_integrals(make_basis(1, 6))
        np.testing.assert_allclose(got, np.full(6, 1.0 / 6.0))

    def test_sum_to_one(self):
        for q in (1, 2, 3, 4):
            for k in (1, 3, 12, 40):
                assert abs(basis_integrals(make_basis(q, k)).sum() - 1.0) < 1e-12

    @pytest.mark.parametrize("q,k", [(2, 4), (3, 5), (4, 2), (3, 1), (1, 5)])
    def test_agrees_with_adaptive_quadrature(self, q, k):
        b = make_basis(q, k)
        closed = basis_integrals(b)
        for i in range(b.J):
            quad = oracle.quad_integrate(
                lambda t, i=i: dense_matrix(b, [t])[0, i], 0.0, 1.0,
                tol=1e-11, breakpoints=b.knots)
            assert abs(quad - closed[i]) < 1e-10


class TestScaledBasis:
    def test_indicator_scaling(self):
        s = make_scaled(make_basis(1, 4))
        first, vals = eval_scaled_many(s, [0.30])
        assert first[0] == 1
        np.testing.assert_allclose(vals, [[4.0]])

    def test_first_function_scale_q3_k5(self):
        b = make_basis(3, 5)
        s = make_scaled(b)
        _, raw = eval_basis_many(b, [0.05])
        _, scaled = eval_scaled_many(s, [0.05])
        np.testing.assert_allclose(scaled[0][0], 15.0 * raw[0][0])

    def test_scaled_functions_integrate_to_one(self):
        s = make_scaled(make_basis(3, 4))
        for i in range(s.J):
            def f(t, i=i):
                row = dense_matrix(s.base, [t])[0]
                return row[i] / s.integrals[i]
            got = oracle.quad_integrate(f, 0.0, 1.0, tol=1e-11,
                                        breakpoints=s.base.knots)
            assert abs(got - 1.0) < 1e-10


class TestGramMatrix:
    def test_histogram_diagonal(self):
        g = gram_matrix(make_basis(1, 5))
        np.testing.assert_allclose(g, np.eye(5) / 5.0, atol=1e-14)

    def test_banded_by_local_support(self):
        b = make_basis(3, 8)
        g = gram_matrix(b)
        k, l = np.meshgrid(np.arange(b.J), np.arange(b.J), indexing="ij")
        assert np.all(g[np.abs(k - l) >= b.q] == 0.0)

    def test_lebesgue_matches_quadrature(self):
        b = make_basis(2, 2)
        g = gram_matrix(b)
        for k in range(b.J):
            for l in range(b.J):
                want = oracle.quad_integrate(
                    lambda t, k=k, l=l: float(np.prod(dense_matrix(b, [t])[0, [k, l]])),
                    0.0, 1.0, tol=1e-11, breakpoints=b.knots)
                assert abs(g[k, l] - want) < 1e-10

    def test_empirical_measure(self):
        b = make_basis(2, 3)
        pts = np.array([0.1, 0.4, 0.9])
        g = gram_matrix(b, points=pts)
        m = dense_matrix(b, pts)
        np.testing.assert_allclose(g, m.T @ m / 3.0)
        np.testing.assert_allclose(g, g.T)


class TestLeastSquares:
    def test_projection_idempotence(self):
        b = make_basis(3, 6)
        xs = np.linspace(0, 1, 4 * b.J)
        rng = np.random.default_rng(3)
        theta = rng.normal(size=b.J)
        got = least_squares_fit(b, xs, dense_matrix(b, xs) @ theta)
        np.testing.assert_allclose(got, theta, atol=1e-8)

    def test_reproduces_linear_functions(self):
        b = make_basis(2, 5)
        xs = np.linspace(0, 1, 200)
        coef = least_squares_fit(b, xs, xs)
        resid = dense_matrix(b, xs) @ coef - xs
        assert np.max(np.abs(resid)) < 1e-8

    def test_positive_coefficients_for_positive_smooth_target(self):
        b = basis_with_dim(3, 32)
        xs = np.linspace(0, 1, 10000)
        coef = least_squares_fit(b, xs, 2.0 - xs)
        assert coef.min() > 0.0

    def test_degenerate_grid_rejected(self):
        b = make_basis(2, 4)
        with pytest.raises(ConfigError):
            least_squares_fit(b, np.full(40, 0.5), np.zeros(40))
        with pytest.raises(ConfigError):
            least_squares_fit(b, np.array([0.1, 0.2]), np.zeros(2))
