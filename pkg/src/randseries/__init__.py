"""MCMC-free Bayesian random-series estimation on B-spline bases.

Finite random series priors (a prior on the number of basis terms plus a
conjugate prior on the coefficients) admit closed-form posterior means for
density estimation, Whittle spectral estimation, binary and Poisson
regression, and conjugate Gaussian models.  This package evaluates those
posterior means exactly or by seeded importance-sampling Monte Carlo.
"""

from .density import (DensityModel, LOGISTIC, TransformedSample,
                      expnorm_mixture_density, fit_density, fit_density_real,
                      posterior_variance_at, sample_expnorm_mixture,
                      transform_unbounded)
from .engine import (Exact, MonteCarlo, PosteriorEstimate, RatioResult,
                     RatioSumSpec, Slot, build_slot, dimension_posterior,
                     enumerate_compositions, exact_ratio, mc_ratio)
from .errors import (ConfigError, EnumerationBudgetError, NumericalError,
                     RandSeriesError)
from .linmodel import (FunctionalData, FunctionalDesign, GaussRegressionModel,
                       SequenceModel, WhiteNoiseFit, build_functional_design,
                       fit_functional, fit_gauss_regression, fit_whitenoise)
from .priors import (BetaIndepPrior, DimensionPrior, DirichletPrior,
                     GammaIndepPrior, NormalIidPrior, coef_log_density,
                     coef_sample, dim_log_pmf, parse_coefficient_prior,
                     parse_dimension_prior)
from .regression import BinaryModel, PoissonModel, fit_binary, fit_poisson
from .spectral import (PeriodogramData, SpectralModel, fit_inverse_spectral,
                       periodogram, spectral_density_estimate)
from .splinebasis import (ScaledBasis, SplineBasis, basis_integrals,
                          basis_with_dim, dense_matrix, eval_basis,
                          eval_basis_many, eval_scaled_many, gram_matrix,
                          least_squares_fit, make_basis, make_scaled)

__version__ = "0.1.0"
