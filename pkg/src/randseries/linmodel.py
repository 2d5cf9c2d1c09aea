"""Conjugate Gaussian models: white-noise sequence, spline regression with
unknown noise, and scalar-on-function regression.

These are fully conjugate, so every fit is exact: per candidate dimension the
posterior is available in closed form, per-dimension evidences weight the
mixture, and no sampling is involved.  The noise variance carries an
inverse-gamma prior; an optional lower bound on sigma replaces the closed
form with one-dimensional quadrature over the truncated prior.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .engine import PosteriorEstimate
from .errors import ConfigError
from .oracle import quad_integrate
from .priors import DimensionPrior
from .splinebasis import SplineBasis, basis_with_dim, dense_matrix


# ---------------------------------------------------------------------------
# white-noise sequence model


@dataclass(frozen=True)
class SequenceModel:
    """Observed coordinates X_i = theta_i + eps_i / sqrt(n), with iid
    N(0, tau2) coefficients up to a random truncation point."""

    observations: np.ndarray
    n: float
    tau2: float
    dim_prior: DimensionPrior

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        object.__setattr__(self, "observations", obs)
        if obs.ndim != 1 or obs.size == 0:
            raise ConfigError("sequence model needs a one-dimensional sample")
        if self.n < 1:
            raise ConfigError("noise level parameter n must be >= 1")
        if self.tau2 <= 0.0:
            raise ConfigError("coefficient prior variance must be positive")
        if self.dim_prior.j_max > obs.size:
            raise ConfigError(
                f"truncation upper bound {self.dim_prior.j_max} exceeds the "
                f"{obs.size} observed coordinates"
            )


@dataclass(frozen=True)
class WhiteNoiseFit:
    coef_mean: np.ndarray
    dim_posterior: dict[int, float]
    shrinkage: float
    log_marginals: dict[int, float]


def fit_whitenoise(model: SequenceModel) -> WhiteNoiseFit:
    """Exact posterior coefficient means mixed over the truncation point."""
    x = model.observations
    m = x.size
    noise_var = 1.0 / model.n
    signal_var = model.tau2 + noise_var
    shrink = model.n * model.tau2 / (model.n * model.tau2 + 1.0)

    def log_norm(values, var):
        return -0.5 * (np.log(2.0 * np.pi * var) + values ** 2 / var)

    ll_signal = log_norm(x, signal_var)
    ll_noise = log_norm(x, noise_var)
    prefix = np.concatenate([[0.0], np.cumsum(ll_signal - ll_noise)])
    total_noise = float(ll_noise.sum())

    js = list(model.dim_prior.support)
    log_marg = {j: total_noise + float(prefix[j]) for j in js}
    log_post = np.array([model.dim_prior.log_pmf(j) + log_marg[j] for j in js])
    post = np.exp(log_post - logsumexp(log_post))
    post /= post.sum()
    dim_posterior = {j: float(p) for j, p in zip(js, post)}

    # coefficient i keeps its shrunk value under every J >= i+1
    weight_at_least = np.zeros(m)
    for j, p in dim_posterior.items():
        weight_at_least[:j] += p
    coef = shrink * x * weight_at_least
    return WhiteNoiseFit(coef_mean=coef, dim_posterior=dim_posterior,
                         shrinkage=shrink, log_marginals=log_marg)


# ---------------------------------------------------------------------------
# Gaussian regression with normal-inverse-gamma conjugacy


@dataclass(frozen=True)
class GaussRegressionModel:
    """Spline regression with theta | sigma2 ~ N(0, sigma2 tau2 I) and
    sigma2 ~ InvGamma(noise_shape, noise_rate); optional sigma lower bound."""

    q: int
    dim_prior: DimensionPrior
    tau2: float = 1.0
    noise_shape: float = 1.0
    noise_rate: float = 1.0
    sigma_min: float = 0.0

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError("basis order must be >= 1")
        if self.dim_prior.j_min < self.q:
            raise ConfigError(
                f"dimension prior lower bound {self.dim_prior.j_min} is below "
                f"the basis order {self.q}"
            )
        if min(self.tau2, self.noise_shape, self.noise_rate) <= 0.0:
            raise ConfigError("tau2 and noise hyperparameters must be positive")
        if self.sigma_min < 0.0:
            raise ConfigError("sigma lower bound cannot be negative")


def _nig_fit(design: np.ndarray, x: np.ndarray, tau2: float, a0: float,
             b0: float, sigma_min: float) -> tuple[float, np.ndarray]:
    """Log evidence and posterior coefficient mean for one design matrix."""
    n, j = design.shape
    lam = design.T @ design + np.eye(j) / tau2
    chol = np.linalg.cholesky(lam)
    half = np.linalg.solve(chol, design.T @ x) if n else np.zeros(j)
    coef = np.linalg.solve(chol.T, half)
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    quad = float(x @ x - half @ half)
    a_n = a0 + 0.5 * n
    b_n = b0 + 0.5 * quad
    base = (-0.5 * n * np.log(2.0 * np.pi)
            - 0.5 * (j * np.log(tau2) + logdet))
    if sigma_min == 0.0:
        log_ev = (base + a0 * np.log(b0) - gammaln(a0)
                  + float(gammaln(a_n)) - a_n * np.log(b_n))
    else:
        # prior constant cancels against the truncation renormalizer
        log_ev = (base + _truncated_gamma_integral(a_n, b_n, sigma_min)
                  - _truncated_gamma_integral(a0, b0, sigma_min))
    return float(log_ev), coef


def _truncated_gamma_integral(shape: float, rate: float, sigma_min: float) -> float:
    """log of integral_{sigma_min}^inf (sigma2)^(-shape-1) exp(-rate/sigma2)
    dsigma2, computed by adaptive quadrature in u = 1/sigma2."""
    u_max = 1.0 / (sigma_min * sigma_min)
    mode = max(min((shape - 1.0) / rate, u_max), 0.0)
    peak = (shape - 1.0) * np.log(mode) - rate * mode if mode > 0.0 else 0.0

    def integrand(u: float) -> float:
        if u <= 0.0:
            # u^(shape-1) limit; shape < 1 is integrably singular and left
            # to adaptive subdivision
            return float(np.exp(-peak)) if shape == 1.0 else 0.0
        return float(np.exp((shape - 1.0) * np.log(u) - rate * u - peak))

    # guide subdivision toward the peak: u_max can dwarf the mass scale
    scale = (shape + 1.0) / rate
    breaks = scale * np.array([1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0])
    laplace = np.sqrt(2.0 * np.pi * max(shape, 1.0)) / rate
    value = quad_integrate(integrand, 0.0, u_max, tol=1e-10 * max(laplace, 1e-3),
                           breakpoints=breaks)
    return float(peak + np.log(value))


def fit_gauss_regression(model: GaussRegressionModel, z, x, grid) -> PosteriorEstimate:
    """Posterior mean regression curve, mixed over dimensions by evidence."""
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    if z.shape != x.shape:
        raise ConfigError("covariates and responses must have equal length")
    if z.size and (np.min(z) < 0.0 or np.max(z) > 1.0):
        raise ConfigError("covariates must lie in [0, 1]")
    order = np.lexsort((x, z))  # canonical row order: evidence ignores shuffles
    z, x = z[order], x[order]
    grid = np.atleast_1d(np.asarray(grid, dtype=float))

    bases: dict[int, SplineBasis] = {}
    designs = {}
    for j in model.dim_prior.support:
        bases[j] = basis_with_dim(model.q, j)
        designs[j] = dense_matrix(bases[j], z) if z.size else np.zeros((0, j))
    return _evidence_mixture(model, designs, bases, x, grid,
                             diagnostics={"model": "gauss_regression",
                                          "n_obs": int(z.size)})


def _evidence_mixture(model, designs, bases, x, grid, diagnostics) -> PosteriorEstimate:
    js = list(model.dim_prior.support)
    log_ev, coefs = {}, {}
    for j in js:
        log_ev[j], coefs[j] = _nig_fit(designs[j], x, model.tau2,
                                       model.noise_shape, model.noise_rate,
                                       model.sigma_min)
    log_post = np.array([model.dim_prior.log_pmf(j) + log_ev[j] for j in js])
    post = np.exp(log_post - logsumexp(log_post))
    post /= post.sum()
    dim_posterior = {j: float(p) for j, p in zip(js, post)}

    mean = np.zeros(grid.size)
    for j, p in dim_posterior.items():
        mean += p * (dense_matrix(bases[j], grid) @ coefs[j])
    return PosteriorEstimate(grid=grid, mean=mean, stderr=np.zeros_like(mean),
                             variance=None, dim_posterior=dim_posterior,
                             method="exact", diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# functional regression


@dataclass(frozen=True)
class FunctionalData:
    """Trajectories observed on a shared, sorted time grid in [0, 1]."""

    times: np.ndarray
    trajectories: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        z = np.atleast_2d(np.asarray(self.trajectories, dtype=float))
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "trajectories", z)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0.0):
            raise ConfigError("time grid must be strictly increasing")
        if np.min(t) < 0.0 or np.max(t) > 1.0:
            raise ConfigError("time grid must lie in [0, 1]")
        if z.shape[1] != t.size:
            raise ConfigError("trajectories must be sampled on the time grid")


@dataclass(frozen=True)
class FunctionalDesign:
    """Rows W_ik = integral of Z_i(t) B_k(t) dt (trapezoidal quadrature)."""

    basis: SplineBasis
    matrix: np.ndarray


def _trapezoid_weights(t: np.ndarray) -> np.ndarray:
    w = np.zeros_like(t)
    d = np.diff(t)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def build_functional_design(data: FunctionalData, basis: SplineBasis) -> FunctionalDesign:
    """Project trajectories onto the basis by trapezoidal quadrature."""
    if data.times.size < 4 * basis.J:
        warnings.warn(
            f"time grid of {data.times.size} points is coarse for dimension "
            f"{basis.J}; quadrature error may dominate", stacklevel=2)
    w = _trapezoid_weights(data.times)
    bmat = dense_matrix(basis, data.times)
    return FunctionalDesign(basis=basis, matrix=data.trajectories @ (w[:, None] * bmat))


def fit_functional(data: FunctionalData, responses, model: GaussRegressionModel,
                   grid) -> PosteriorEstimate:
    """Posterior mean of the coefficient function beta(t) over ``grid``."""
    x = np.asarray(responses, dtype=float)
    if x.ndim != 1 or x.size != data.trajectories.shape[0]:
        raise ConfigError("responses must match the number of trajectories")
    order = np.lexsort(tuple(data.trajectories[:, c]
                             for c in range(data.times.size - 1, -1, -1)) + (x,))
    data = FunctionalData(data.times, data.trajectories[order])
    x = x[order]
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    bases, designs = {}, {}
    for j in model.dim_prior.support:
        bases[j] = basis_with_dim(model.q, j)
        designs[j] = build_functional_design(data, bases[j]).matrix
    return _evidence_mixture(model, designs, bases, x, grid,
                             diagnostics={"model": "functional",
                                          "n_obs": int(x.size)})
