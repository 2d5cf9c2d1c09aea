"""Whittle-likelihood spectral density estimation.

The periodogram is taken at frequencies 2j/n on the [0, 1] scale (kernel
exp(-i pi t lambda)); a note on mapping to the usual [0, pi] convention is in
the README.  Ordinates are treated as independent exponentials with means
f(omega_j), the inverse spectral density 1/f is modeled as a positive spline
series with independent Gamma coefficients, and the posterior mean of 1/f
comes out of the engine.  The reported spectral density curve is the plug-in
reciprocal 1 / E[1/f], not a posterior mean of f.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import engine
from .engine import (GammaLaw, JComponent, PosteriorEstimate, RatioSumSpec,
                     build_slot)
from .errors import ConfigError
from .priors import DimensionPrior, GammaIndepPrior
from .splinebasis import basis_with_dim, dense_matrix


@dataclass(frozen=True)
class PeriodogramData:
    """Ordinates U_j = I_n(2j/n) for j = 1..floor(n/2)."""

    n: int
    freqs: np.ndarray
    ordinates: np.ndarray
    mean_subtracted: float

    @property
    def nu(self) -> int:
        return self.freqs.size


def periodogram(series) -> PeriodogramData:
    """Periodogram of a real series at frequencies 2j/n, j = 1..floor(n/2).

    The sample mean is removed first (the model assumes a centered series);
    the subtracted value is recorded.  At these frequencies the subtraction
    leaves the ordinates unchanged up to rounding.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ConfigError("periodogram needs a one-dimensional series of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ConfigError("series entries must be finite")
    n = x.size
    mean = float(x.mean())
    x = x - mean
    nu = n // 2
    js = np.arange(1, nu + 1)
    freqs = 2.0 * js / n
    t = np.arange(1, n + 1)
    phases = np.exp(-1j * np.pi * np.outer(freqs, t))
    transform = phases @ x
    ordinates = (transform.real ** 2 + transform.imag ** 2) / (2.0 * np.pi * n)
    return PeriodogramData(n=n, freqs=freqs, ordinates=ordinates,
                           mean_subtracted=mean)


@dataclass(frozen=True)
class SpectralModel:
    """Basis order, dimension prior, and Gamma prior for 1/f coefficients."""

    q: int
    dim_prior: DimensionPrior
    gamma: GammaIndepPrior = GammaIndepPrior(1.0, 1.0)

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError("basis order must be >= 1")
        if self.dim_prior.j_min < self.q:
            raise ConfigError(
                f"dimension prior lower bound {self.dim_prior.j_min} is below "
                f"the basis order {self.q}"
            )


def build_spectral_spec(model: SpectralModel, pgram: PeriodogramData) -> RatioSumSpec:
    if pgram.nu < 1:
        raise ConfigError("periodogram carries no usable frequencies")
    components = {}
    for j in model.dim_prior.support:
        basis = basis_with_dim(model.q, j)
        shape, prior_rate = model.gamma.params_for(j)
        # exposure rates: prior rate plus ordinate-weighted basis mass
        design = dense_matrix(basis, pgram.freqs)
        rates = prior_rate + pgram.ordinates @ design
        law = GammaLaw(shape, prior_rate, rates)
        slots = tuple(build_slot(basis, float(w)) for w in pgram.freqs)
        components[j] = JComponent(
            dim=j, law=law, slots=slots,
            eval_slot=functools.partial(build_slot, basis),
        )
    return RatioSumSpec(dim_prior=model.dim_prior, components=components)


def fit_inverse_spectral(pgram: PeriodogramData, model: SpectralModel, grid,
                         method) -> PosteriorEstimate:
    """Posterior mean of the inverse spectral density over ``grid``."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size and (np.min(grid) < 0.0 or np.max(grid) > 1.0):
        raise ConfigError("frequency grid must lie in [0, 1]")
    spec = build_spectral_spec(model, pgram)
    est = engine.evaluate(spec, grid, method)
    est.diagnostics["model"] = "spectral"
    est.diagnostics["n_frequencies"] = int(pgram.nu)
    est.diagnostics["mean_subtracted"] = pgram.mean_subtracted
    return est


def spectral_density_estimate(inverse_estimate: PosteriorEstimate) -> np.ndarray:
    """Plug-in spectral density: pointwise reciprocal of the posterior mean
    of 1/f.  Not a posterior mean of f itself; flagged as such in outputs."""
    inv = np.asarray(inverse_estimate.mean, dtype=float)
    if np.any(inv <= 0.0):
        raise ConfigError("inverse spectral estimate must be strictly positive")
    return 1.0 / inv
