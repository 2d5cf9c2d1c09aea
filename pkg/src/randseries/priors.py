"""Priors on the basis dimension and on coefficient vectors.

The dimension prior is a standard discrete family (geometric, Poisson or
negative binomial) truncated to a finite range and renormalized; truncation
is what makes the downstream mixture over dimensions computable.  Coefficient
priors are the conjugate families the closed-form posteriors need: Dirichlet
on the simplex, independent Gamma or Beta coordinates, and iid normal.
Samplers and exact log densities are included so the quadrature oracle can
cross-check every marginal-likelihood formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaln, gammainc, gammaln, logsumexp

from .errors import ConfigError

_DIM_FAMILIES = ("geometric", "poisson", "negbin")


@dataclass(frozen=True)
class DimensionPrior:
    """Truncated, renormalized prior on the basis dimension J.

    ``params`` by family: geometric ``(p,)`` with pmf p(1-p)^(j-1) on j >= 1;
    poisson ``(lam,)`` on j >= 0; negbin ``(r, p)`` counting failures,
    C(j+r-1, j) p^r (1-p)^j on j >= 0.  Mass outside [j_min, j_max] is
    discarded and the rest renormalized.
    """

    family: str
    params: tuple[float, ...]
    j_min: int
    j_max: int

    def __post_init__(self):
        if self.family not in _DIM_FAMILIES:
            raise ConfigError(f"unknown dimension prior family {self.family!r}")
        if not (1 <= self.j_min <= self.j_max):
            raise ConfigError(
                f"invalid truncation range [{self.j_min}, {self.j_max}]"
            )
        if self.family == "geometric":
            (p,) = self.params
            if not 0.0 < p < 1.0:
                raise ConfigError("geometric success probability must be in (0, 1)")
        elif self.family == "poisson":
            (lam,) = self.params
            if lam <= 0.0:
                raise ConfigError("poisson mean must be positive")
        else:
            r, p = self.params
            if r <= 0.0 or not 0.0 < p < 1.0:
                raise ConfigError("negbin needs r > 0 and p in (0, 1)")
        js = np.asarray(self.support)
        raw = self._raw_log_pmf(js)
        object.__setattr__(self, "_log_norm", float(logsumexp(raw)))

    @property
    def support(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def _raw_log_pmf(self, j):
        j = np.asarray(j, dtype=float)
        if self.family == "geometric":
            (p,) = self.params
            return np.log(p) + (j - 1.0) * np.log1p(-p)
        if self.family == "poisson":
            (lam,) = self.params
            return -lam + j * np.log(lam) - gammaln(j + 1.0)
        r, p = self.params
        return (
            gammaln(j + r) - gammaln(r) - gammaln(j + 1.0)
            + r * np.log(p) + j * np.log1p(-p)
        )

    def log_pmf(self, j: int) -> float:
        if not self.j_min <= j <= self.j_max:
            raise ConfigError(
                f"dimension {j} outside truncation range [{self.j_min}, {self.j_max}]"
            )
        return float(self._raw_log_pmf(j) - self._log_norm)

    def pmf_table(self) -> np.ndarray:
        js = np.asarray(self.support)
        return np.exp(self._raw_log_pmf(js) - self._log_norm)

    def survival_raw(self, j: int) -> float:
        """Untruncated upper-tail mass P(J > j); the prior's tail function."""
        if self.family == "geometric":
            (p,) = self.params
            return float((1.0 - p) ** j)
        if self.family == "poisson":
            (lam,) = self.params
            return float(gammainc(j + 1.0, lam))
        r, p = self.params
        return float(1.0 - betainc(r, j + 1.0, p))

    def interval_raw(self, j: int, c0: float) -> float:
        """Untruncated mass P(j < J < c0 * j) for c0 > 1."""
        if c0 <= 1.0:
            raise ConfigError("interval factor must exceed 1")
        upper = int(np.ceil(c0 * j)) - 1  # largest integer strictly below c0*j
        return self.survival_raw(j) - self.survival_raw(upper)

    @property
    def convention(self) -> str:
        """Human-readable pmf convention, recorded in run diagnostics."""
        return {
            "geometric": "p*(1-p)**(j-1) on j>=1, truncated+renormalized",
            "poisson": "exp(-lam)*lam**j/j! on j>=0, truncated+renormalized",
            "negbin": "C(j+r-1,j)*p**r*(1-p)**j on j>=0, truncated+renormalized",
        }[self.family]

    def spec_string(self) -> str:
        fam = {"geometric": "geom", "poisson": "poisson", "negbin": "negbin"}[self.family]
        params = ":".join(_fmt(v) for v in self.params)
        return f"{fam}:{params}:{self.j_min}:{self.j_max}"


def dim_log_pmf(prior: DimensionPrior, j: int) -> float:
    """Normalized log mass of dimension ``j`` under the truncated prior."""
    return prior.log_pmf(j)


def _fmt(v: float) -> str:
    return repr(int(v)) if float(v).is_integer() else repr(float(v))


def _broadcast(value, j: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(j, arr[0])
    if arr.size != j:
        raise ConfigError(f"{name} has {arr.size} entries, expected {j}")
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} entries must be positive and finite")
    return arr


@dataclass(frozen=True)
class DirichletPrior:
    """Dirichlet prior on the simplex; a scalar broadcasts to every dimension."""

    concentration: object = 1.0

    kind = "dirichlet"

    def params_for(self, j: int) -> np.ndarray:
        return _broadcast(self.concentration, j, "dirichlet concentration")

    def sample(self, j: int, rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(self.params_for(j))

    def log_density(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        a = self.params_for(theta.size)
        if np.any(theta < 0.0) or abs(theta.sum() - 1.0) > 1e-9:
            raise ConfigError("dirichlet point is off the simplex")
        safe = np.where(theta > 0.0, theta, 1.0)
        return float(
            gammaln(a.sum()) - gammaln(a).sum() + ((a - 1.0) * np.log(safe)).sum()
        )

    def spec_string(self) -> str:
        return f"dirichlet:{_fmt_param(self.concentration)}"


@dataclass(frozen=True)
class GammaIndepPrior:
    """Independent Gamma(shape, rate) coordinates."""

    shape: object = 1.0
    rate: object = 1.0

    kind = "gamma"

    def params_for(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        return (
            _broadcast(self.shape, j, "gamma shape"),
            _broadcast(self.rate, j, "gamma rate"),
        )

    def sample(self, j: int, rng: np.random.Generator) -> np.ndarray:
        a, b = self.params_for(j)
        return rng.gamma(shape=a, scale=1.0 / b)

    def log_density(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        a, b = self.params_for(theta.size)
        if np.any(theta <= 0.0):
            raise ConfigError("gamma point must be coordinatewise positive")
        return float(
            (a * np.log(b) - gammaln(a) + (a - 1.0) * np.log(theta) - b * theta).sum()
        )

    def spec_string(self) -> str:
        return f"gamma:{_fmt_param(self.shape)}:{_fmt_param(self.rate)}"


@dataclass(frozen=True)
class BetaIndepPrior:
    """Independent Beta(a, b) coordinates on (0, 1)."""

    a: object = 1.0
    b: object = 1.0

    kind = "beta"

    def params_for(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        return _broadcast(self.a, j, "beta a"), _broadcast(self.b, j, "beta b")

    def sample(self, j: int, rng: np.random.Generator) -> np.ndarray:
        a, b = self.params_for(j)
        return rng.beta(a, b)

    def log_density(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        a, b = self.params_for(theta.size)
        if np.any(theta <= 0.0) or np.any(theta >= 1.0):
            raise ConfigError("beta point must lie in (0, 1) coordinatewise")
        return float(
            ((a - 1.0) * np.log(theta) + (b - 1.0) * np.log1p(-theta)
             - betaln(a, b)).sum()
        )

    def spec_string(self) -> str:
        return f"beta:{_fmt_param(self.a)}:{_fmt_param(self.b)}"


@dataclass(frozen=True)
class NormalIidPrior:
    """iid N(0, tau2) coordinates."""

    tau2: float = 1.0

    kind = "normal"

    def __post_init__(self):
        if self.tau2 <= 0.0:
            raise ConfigError("normal prior variance must be positive")

    def params_for(self, j: int) -> float:
        return self.tau2

    def sample(self, j: int, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(scale=np.sqrt(self.tau2), size=j)

    def log_density(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        j = theta.size
        return float(
            -0.5 * j * np.log(2.0 * np.pi * self.tau2)
            - 0.5 * np.dot(theta, theta) / self.tau2
        )

    def spec_string(self) -> str:
        return f"normal:{repr(float(self.tau2))}"


def _fmt_param(value) -> str:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        return _fmt(arr[0])
    return ",".join(_fmt(v) for v in arr)


def coef_sample(prior, j: int, seed) -> np.ndarray:
    """Draw one coefficient vector of dimension ``j``; reproducible by seed."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return prior.sample(j, rng)


def coef_log_density(prior, theta) -> float:
    """Exact log density of ``theta`` including normalizing constants."""
    return prior.log_density(theta)


def parse_dimension_prior(text: str) -> DimensionPrior:
    """Parse ``family:params...:j_min:j_max``, e.g. ``geom:0.15:5:12``."""
    parts = text.split(":")
    family = parts[0].lower()
    try:
        if family in ("geom", "geometric"):
            p, lo, hi = float(parts[1]), int(parts[2]), int(parts[3])
            extra = parts[4:]
            prior = DimensionPrior("geometric", (p,), lo, hi)
        elif family in ("poisson", "pois"):
            lam, lo, hi = float(parts[1]), int(parts[2]), int(parts[3])
            extra = parts[4:]
            prior = DimensionPrior("poisson", (lam,), lo, hi)
        elif family in ("negbin", "nb"):
            r, p, lo, hi = float(parts[1]), float(parts[2]), int(parts[3]), int(parts[4])
            extra = parts[5:]
            prior = DimensionPrior("negbin", (r, p), lo, hi)
        else:
            raise ConfigError(
                f"unknown dimension prior family {family!r} in {text!r}"
            )
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed dimension prior spec {text!r}") from exc
    if extra:
        raise ConfigError(f"trailing tokens in dimension prior spec {text!r}")
    return prior


def parse_coefficient_prior(text: str):
    """Parse ``family:params...``, e.g. ``dirichlet:1.0`` or ``gamma:1:1``."""
    parts = text.split(":")
    family = parts[0].lower()
    try:
        if family == "dirichlet":
            return DirichletPrior(_parse_param(parts[1]))
        if family == "gamma":
            return GammaIndepPrior(_parse_param(parts[1]), _parse_param(parts[2]))
        if family == "beta":
            return BetaIndepPrior(_parse_param(parts[1]), _parse_param(parts[2]))
        if family == "normal":
            return NormalIidPrior(float(parts[1]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed coefficient prior spec {text!r}") from exc
    raise ConfigError(f"unknown coefficient prior family {family!r} in {text!r}")


def _parse_param(token: str):
    if "," in token:
        return np.array([float(t) for t in token.split(",")])
    return float(token)
