"""Binary and Poisson regression with identity links.

Binary responses use independent Beta coordinates on (0, 1); partition of
unity keeps f(z) = theta'B(z) inside (0, 1), and the complement expands over
the same basis, so each observation routes to a single index.  Poisson counts
expand multinomially: each observation contributes a weak composition of its
count over the supported indices, and the Gamma integrals absorb the rest.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import engine
from .engine import (BetaOccupancyLaw, GammaLaw, JComponent, PosteriorEstimate,
                     RatioSumSpec, build_slot, enumerate_compositions)
from .errors import ConfigError
from .priors import BetaIndepPrior, DimensionPrior, GammaIndepPrior
from .splinebasis import basis_with_dim, dense_matrix

__all__ = [
    "BinaryModel", "PoissonModel", "fit_binary", "fit_poisson",
    "enumerate_compositions",
]


def _check_covariates(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.size and (np.min(z) < 0.0 or np.max(z) > 1.0 or not np.all(np.isfinite(z))):
        raise ConfigError("covariates must lie in [0, 1]")
    return z


def _check_order(q: int, dim_prior: DimensionPrior):
    if q < 1:
        raise ConfigError("basis order must be >= 1")
    if dim_prior.j_min < q:
        raise ConfigError(
            f"dimension prior lower bound {dim_prior.j_min} is below the "
            f"basis order {q}"
        )


@dataclass(frozen=True)
class BinaryModel:
    q: int
    dim_prior: DimensionPrior
    beta: BetaIndepPrior = BetaIndepPrior(1.0, 1.0)

    def __post_init__(self):
        _check_order(self.q, self.dim_prior)


@dataclass(frozen=True)
class PoissonModel:
    q: int
    dim_prior: DimensionPrior
    gamma: GammaIndepPrior = GammaIndepPrior(1.0, 1.0)

    def __post_init__(self):
        _check_order(self.q, self.dim_prior)


def build_binary_spec(model: BinaryModel, z, x) -> RatioSumSpec:
    z = _check_covariates(z)
    x = np.asarray(x)
    if x.shape != z.shape:
        raise ConfigError("covariates and responses must have equal length")
    if x.size and not np.all(np.isin(x, (0, 1))):
        raise ConfigError("binary responses must be 0 or 1")
    x = x.astype(int)
    order = np.lexsort((x, z))  # canonical slot order: row order is irrelevant
    z, x = z[order], x[order]
    components = {}
    for j in model.dim_prior.support:
        basis = basis_with_dim(model.q, j)
        a, b = model.beta.params_for(j)
        slots = tuple(build_slot(basis, float(zi), tally=int(xi))
                      for zi, xi in zip(z, x))
        components[j] = JComponent(
            dim=j, law=BetaOccupancyLaw(a, b), slots=slots,
            eval_slot=functools.partial(build_slot, basis),
            eval_tally=1,  # the evaluation slot carries a unit response
        )
    return RatioSumSpec(dim_prior=model.dim_prior, components=components)


def fit_binary(z, x, model: BinaryModel, grid, method) -> PosteriorEstimate:
    """Posterior mean of the success probability curve over ``grid``."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    _check_covariates(grid)
    spec = build_binary_spec(model, z, x)
    est = engine.evaluate(spec, grid, method)
    est.diagnostics["model"] = "binary"
    est.diagnostics["n_obs"] = int(np.asarray(z).size)
    return est


def build_poisson_spec(model: PoissonModel, z, x) -> RatioSumSpec:
    z = _check_covariates(z)
    x = np.asarray(x)
    if x.shape != z.shape:
        raise ConfigError("covariates and responses must have equal length")
    if x.size and (np.any(x < 0) or np.any(x != np.floor(x))):
        raise ConfigError("poisson responses must be nonnegative integers")
    x = x.astype(int)
    order = np.lexsort((x, z))
    z, x = z[order], x[order]
    components = {}
    for j in model.dim_prior.support:
        basis = basis_with_dim(model.q, j)
        shape, prior_rate = model.gamma.params_for(j)
        # exposure excludes the evaluation slot: only observed covariates
        design = dense_matrix(basis, z) if z.size else np.zeros((0, j))
        rates = prior_rate + design.sum(axis=0)
        slots = tuple(build_slot(basis, float(zi), tally=int(xi), composition=True)
                      for zi, xi in zip(z, x))
        components[j] = JComponent(
            dim=j, law=GammaLaw(shape, prior_rate, rates), slots=slots,
            eval_slot=functools.partial(build_slot, basis),
        )
    return RatioSumSpec(dim_prior=model.dim_prior, components=components)


def fit_poisson(z, x, model: PoissonModel, grid, method) -> PosteriorEstimate:
    """Posterior mean of the intensity curve over ``grid``."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    _check_covariates(grid)
    spec = build_poisson_spec(model, z, x)
    est = engine.evaluate(spec, grid, method)
    est.diagnostics["model"] = "poisson"
    est.diagnostics["n_obs"] = int(np.asarray(z).size)
    return est
