"""Tests for the ratio-of-sums engine."""

import math

import numpy as np
import pytest
from scipy.special import logsumexp

from randseries import engine, oracle
from randseries.density import DensityModel, build_density_spec
from randseries.engine import (Exact, MonteCarlo, Slot, build_slot,
                               composition_unrank, enumerate_compositions,
                               exact_ratio, mc_ratio)
from randseries.errors import ConfigError, EnumerationBudgetError
from randseries.priors import DimensionPrior, DirichletPrior
from randseries.splinebasis import basis_with_dim, make_basis, make_scaled


def density_spec(q, j_lo, j_hi, data, p=0.4, concentration=1.0):
    prior = DimensionPrior("geometric", (p,), j_lo, j_hi)
    model = DensityModel(q=q, dim_prior=prior,
                         dirichlet=DirichletPrior(concentration))
    return build_density_spec(model, data)


class TestSlots:
    def test_interior_support_size(self):
        basis = make_basis(3, 6)
        slot = build_slot(basis, 0.4)
        assert len(slot.support) == 3
        assert slot.candidate_count == 3

    def test_composition_candidate_count(self):
        basis = make_basis(2, 4)
        slot = build_slot(basis, 0.4, tally=3, composition=True)
        assert slot.candidate_count == math.comb(3 + 2 - 1, 2 - 1) == 4

    def test_multinomial_expansion_identity(self):
        # sum over candidates of X! * weight equals (sum of weights)^X
        basis = make_basis(3, 5)
        for x_count in (0, 1, 3, 5):
            slot = build_slot(basis, 0.37, tally=x_count, composition=True)
            total = sum(math.exp(lw) for _, _, _, lw in slot.candidates())
            want = slot.weight_sum ** x_count / math.factorial(x_count)
            assert abs(total - want) < 1e-12 * max(want, 1.0)

    def test_zero_weights_dropped(self):
        basis = make_basis(2, 2)
        slot = build_slot(basis, 0.0)  # only the first function is nonzero
        assert slot.support == (0,)

    def test_slot_validation(self):
        with pytest.raises(ConfigError):
            Slot(support=(0,), weights=(0.0,))
        with pytest.raises(ConfigError):
            Slot(support=(0, 1), weights=(0.5,))


class TestCompositions:
    def test_examples(self):
        assert enumerate_compositions(3, 2) == [(0, 3), (1, 2), (2, 1), (3, 0)]
        assert enumerate_compositions(0, 4) == [(0, 0, 0, 0)]
        assert len(enumerate_compositions(4, 3)) == 15

    def test_all_sum_to_total(self):
        for comp in enumerate_compositions(5, 3):
            assert sum(comp) == 5

    def test_unrank_matches_enumeration(self):
        comps = enumerate_compositions(4, 3)
        for rank, comp in enumerate(comps):
            assert composition_unrank(4, 3, rank) == comp

    def test_invalid_arguments(self):
        with pytest.raises(ConfigError):
            enumerate_compositions(3, 0)
        with pytest.raises(ConfigError):
            enumerate_compositions(-1, 2)


class TestExact:
    def test_histogram_posterior_mean(self):
        # one observation in a bin; flat Dirichlet over 4 bins
        spec = density_spec(1, 4, 4, [0.30])
        same_bin = exact_ratio(spec, 0.27).value
        other_bin = exact_ratio(spec, 0.80).value
        np.testing.assert_allclose(same_bin, 4.0 * 2.0 / 5.0, atol=1e-10)
        np.testing.assert_allclose(other_bin, 4.0 / 5.0, atol=1e-10)

    def test_no_data_gives_prior_mean(self):
        spec = density_spec(2, 2, 5, [])
        prior = spec.dim_prior
        x = 0.61
        want = 0.0
        for j in prior.support:
            scaled = make_scaled(basis_with_dim(2, j))
            from randseries.splinebasis import eval_scaled_many
            _, vals = eval_scaled_many(scaled, [x])
            want += math.exp(prior.log_pmf(j)) * vals.sum() / j
        got = exact_ratio(spec, x).value
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_exact_stderr_is_zero(self):
        spec = density_spec(2, 2, 3, [0.2, 0.7])
        assert exact_ratio(spec, 0.5).stderr == 0.0

    def test_budget_exceeded(self):
        rng = np.random.default_rng(0)
        spec = density_spec(3, 5, 12, rng.random(50))
        with pytest.raises(EnumerationBudgetError):
            exact_ratio(spec, 0.5, budget=10**6)

    def test_matches_brute_force_mixture(self):
        data = [0.15, 0.55, 0.83]
        spec = density_spec(2, 2, 3, data)
        x = 0.42
        num, den = [], []
        for j in (2, 3):
            scaled = make_scaled(basis_with_dim(2, j))
            from randseries.splinebasis import eval_scaled_many

            def g(th, scaled=scaled, j=j):
                first, vals = eval_scaled_many(scaled, [x])
                row = np.zeros(j)
                row[first[0]:first[0] + 2] = vals[0]
                return th @ row

            mean_j = oracle.brute_posterior("density", q=2, j=j, data=data,
                                            prior=DirichletPrior(1.0), g=g,
                                            tol=1e-5)
            lev = oracle.brute_log_evidence("density", q=2, j=j, data=data,
                                            prior=DirichletPrior(1.0), tol=1e-5)
            lw = spec.dim_prior.log_pmf(j) + lev
            num.append(lw + np.log(mean_j))
            den.append(lw)
        want = float(np.exp(logsumexp(num) - logsumexp(den)))
        got = exact_ratio(spec, x).value
        np.testing.assert_allclose(got, want, rtol=1e-6)


class TestMonteCarlo:
    def test_zero_variance_spec(self):
        # with no observations every draw is identical: stderr must be 0
        spec = density_spec(1, 4, 4, [])
        res = mc_ratio(spec, 0.3, 100, seed=0)
        assert res.stderr == 0.0
        np.testing.assert_allclose(res.value, 1.0)

    def test_needs_two_draws(self):
        spec = density_spec(1, 4, 4, [0.5])
        with pytest.raises(ConfigError):
            mc_ratio(spec, 0.3, 1, seed=0)

    def test_reproducible_under_seed(self):
        spec = density_spec(2, 2, 4, [0.2, 0.5, 0.9])
        a = mc_ratio(spec, 0.4, 2000, seed=123)
        b = mc_ratio(spec, 0.4, 2000, seed=123)
        assert a.value == b.value and a.stderr == b.stderr

    def test_denominator_independent_of_evaluation_point(self):
        spec = density_spec(2, 2, 4, [0.2, 0.5, 0.9])
        a = mc_ratio(spec, 0.15, 500, seed=7)
        b = mc_ratio(spec, 0.85, 500, seed=7)
        assert a.dim_log_terms == b.dim_log_terms

    @pytest.mark.parametrize("sampling", ["weighted", "uniform"])
    def test_agrees_with_exact(self, sampling):
        spec = density_spec(2, 2, 4, [0.12, 0.48, 0.77, 0.91])
        exact = exact_ratio(spec, 0.33).value
        hits = 0
        for seed in range(20):
            res = mc_ratio(spec, 0.33, 20000, seed=seed, sampling=sampling)
            hits += abs(res.value - exact) <= 4.0 * res.stderr
        assert hits >= 19

    def test_rao_blackwellization_unbiased(self):
        # RB and sampled evaluation slots agree in expectation
        spec = density_spec(2, 2, 3, [0.3, 0.7])
        x = 0.52
        rb, sampled = [], []
        for seed in range(200):
            rb.append(mc_ratio(spec, x, 400, seed=seed).value)
            sampled.append(mc_ratio(spec, x, 400, seed=seed,
                                    rao_blackwell=False).value)
        rb, sampled = np.array(rb), np.array(sampled)
        gap = abs(rb.mean() - sampled.mean())
        se = np.sqrt(rb.var(ddof=1) / 200 + sampled.var(ddof=1) / 200)
        assert gap <= 3.0 * se
        # and the RB estimator should not be noisier
        assert rb.std() <= sampled.std() * 1.25

    def test_log_space_safety_large_n(self):
        rng = np.random.default_rng(5)
        spec = density_spec(3, 5, 8, rng.random(200))
        res = mc_ratio(spec, 0.5, 300, seed=1)
        assert np.isfinite(res.value) and np.isfinite(res.stderr)


class TestDimensionPosterior:
    def test_single_point_prior(self):
        spec = density_spec(2, 3, 3, [0.4, 0.6])
        post = engine.dimension_posterior(spec)
        assert post == {3: 1.0}

    def test_no_data_returns_prior(self):
        spec = density_spec(2, 2, 6, [])
        post = engine.dimension_posterior(spec)
        table = spec.dim_prior.pmf_table()
        for i, j in enumerate(spec.dim_prior.support):
            assert abs(post[j] - table[i]) < 1e-12

    def test_sums_to_one(self):
        spec = density_spec(2, 2, 6, [0.2, 0.21, 0.23, 0.8])
        post = engine.dimension_posterior(spec)
        assert abs(sum(post.values()) - 1.0) < 1e-12

    def test_clustered_data_matches_brute_weights(self):
        data = [0.18, 0.22, 0.25]
        spec = density_spec(2, 2, 3, data)
        post = engine.dimension_posterior(spec)
        log_terms = {}
        for j in (2, 3):
            lev = oracle.brute_log_evidence("density", q=2, j=j, data=data,
                                            prior=DirichletPrior(1.0), tol=1e-6)
            log_terms[j] = spec.dim_prior.log_pmf(j) + lev
        shift = logsumexp(list(log_terms.values()))
        for j in (2, 3):
            assert abs(post[j] - math.exp(log_terms[j] - shift)) < 1e-3

    def test_mc_dimension_posterior(self):
        spec = density_spec(2, 2, 4, [0.2, 0.5, 0.9])
        exact = engine.dimension_posterior(spec)
        mc = engine.dimension_posterior(spec, MonteCarlo(n_draws=200000, seed=0))
        for j in exact:
            assert abs(exact[j] - mc[j]) < 5e-3


class TestCurveEvaluation:
    def test_exact_curve_matches_pointwise_ratio(self):
        spec = density_spec(2, 2, 4, [0.2, 0.5, 0.9])
        grid = np.linspace(0.0, 1.0, 11)
        est = engine.evaluate(spec, grid, Exact())
        for x, m in zip(grid, est.mean):
            assert abs(exact_ratio(spec, float(x)).value - m) < 1e-12

    def test_mc_curve_matches_pointwise_ratio(self):
        spec = density_spec(2, 2, 4, [0.2, 0.5, 0.9])
        grid = np.linspace(0.0, 1.0, 7)
        est = engine.evaluate(spec, grid, MonteCarlo(n_draws=3000, seed=5))
        for x, m, s in zip(grid, est.mean, est.stderr):
            res = mc_ratio(spec, float(x), 3000, seed=5)
            assert abs(res.value - m) < 1e-10
            assert abs(res.stderr - s) < 1e-10


class TestConstantWeightSpec:
    def test_single_candidate_slots_have_zero_mc_variance(self):
        # q=1 with a fixed dimension: every observation has exactly one
        # candidate, so the configuration sum is a single term and the Monte
        # Carlo estimate must equal the exact value with stderr exactly 0
        spec = density_spec(1, 3, 3, [0.1, 0.45, 0.8, 0.45])
        exact = exact_ratio(spec, 0.5).value
        res = mc_ratio(spec, 0.5, 50, seed=4)
        assert res.stderr == 0.0
        assert res.value == pytest.approx(exact, abs=1e-14)
