"""Independent verification tools.

Nothing here shares code with the fast paths it checks: quadrature is plain
adaptive Simpson, the B-spline reference is the two-term recurrence evaluated
naively, the periodogram reference is a literal double loop, and tiny-model
posteriors are integrated over the coefficient prior directly.  These run
orders of magnitude slower than the engine; they exist to catch formula
errors, not to be fast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaincinv, gammaln

from .errors import ConfigError, NumericalError
from .priors import BetaIndepPrior, DirichletPrior, GammaIndepPrior
from .splinebasis import (SplineBasis, basis_with_dim, dense_matrix,
                          eval_scaled_many, least_squares_fit, make_scaled)


# ---------------------------------------------------------------------------
# adaptive quadrature


def quad_integrate(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-10, breakpoints: Sequence[float] | None = None,
                   max_nodes: int = 2_000_000) -> float:
    """Adaptive composite Simpson integration with absolute-error target ``tol``.

    ``breakpoints`` marks known kinks (e.g. spline knots); the interval is
    split there first.  Raises :class:`NumericalError` if the subdivision
    budget runs out before the tolerance is met.
    """
    if tol <= 0.0:
        raise ConfigError("quadrature tolerance must be positive")
    if b < a:
        raise ConfigError("integration bounds out of order")
    if b == a:
        return 0.0
    edges = [a, b]
    if breakpoints is not None:
        edges.extend(t for t in breakpoints if a < t < b)
    edges = sorted(set(edges))
    budget = [max_nodes]
    total = 0.0
    seg_tol = tol / (len(edges) - 1)  # equal split: segments can differ wildly in size
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += _adaptive_simpson(f, lo, hi, seg_tol, budget)
    return total


def _simpson(f, a, b, fa, fm, fb):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(f, a, b, tol, budget):
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    budget[0] -= 3
    return _simpson_step(f, a, b, fa, fm, fb, _simpson(f, a, b, fa, fm, fb),
                         tol, budget)


def _simpson_step(f, a, b, fa, fm, fb, whole, tol, budget):
    if budget[0] <= 0:
        raise NumericalError("quadrature failed to converge within node budget")
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    budget[0] -= 2
    left = _simpson(f, a, m, fa, flm, fm)
    right = _simpson(f, m, b, fm, frm, fb)
    if abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, budget)
            + _simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, budget))


# ---------------------------------------------------------------------------
# naive B-spline and periodogram references


def naive_bspline_value(knots: np.ndarray, order: int, index: int, x: float) -> float:
    """Textbook two-term recurrence for one basis function, with the final
    interval treated as right-closed at the domain end."""
    t = np.asarray(knots, dtype=float)
    end = t[-1]

    def rec(i: int, k: int) -> float:
        if k == 1:
            inside = t[i] <= x < t[i + 1]
            at_end = x == end and t[i] < t[i + 1] == end
            return 1.0 if (inside or at_end) else 0.0
        left = 0.0
        if t[i + k - 1] != t[i]:
            left = (x - t[i]) / (t[i + k - 1] - t[i]) * rec(i, k - 1)
        right = 0.0
        if t[i + k] != t[i + 1]:
            right = (t[i + k] - x) / (t[i + k] - t[i + 1]) * rec(i + 1, k - 1)
        return left + right

    return rec(index, order)


def naive_basis_row(basis: SplineBasis, x: float) -> np.ndarray:
    """All J basis values at ``x`` via the naive recurrence."""
    return np.array([naive_bspline_value(basis.knots, basis.q, i, x)
                     for i in range(basis.J)])


def reference_periodogram(series) -> np.ndarray:
    """O(n^2) literal periodogram at frequencies 2j/n, j = 1..floor(n/2):
    |sum_t x_t exp(-i pi t w)|^2 / (2 pi n), written as explicit loops."""
    x = [float(v) for v in series]
    n = len(x)
    ords = []
    for j in range(1, n // 2 + 1):
        omega = 2.0 * j / n
        re = 0.0
        im = 0.0
        for t in range(1, n + 1):
            angle = np.pi * t * omega
            re += x[t - 1] * np.cos(angle)
            im -= x[t - 1] * np.sin(angle)
        ords.append((re * re + im * im) / (2.0 * np.pi * n))
    return np.array(ords)


# ---------------------------------------------------------------------------
# brute-force posterior integration for tiny models


_MAX_BRUTE_DIM = 3
_MAX_BRUTE_OBS = 3
_TAIL = 1e-10


def _gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights  # mapped to (0, 1)


def _tensor_grid(dims: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = _gauss_nodes(order)
    pt_grids = np.meshgrid(*([nodes] * dims), indexing="ij")
    w_grids = np.meshgrid(*([weights] * dims), indexing="ij")
    pts = np.column_stack([g.ravel() for g in pt_grids])
    w = np.ones(pts.shape[0])
    for g in w_grids:
        w *= g.ravel()
    return pts, w


class _BruteModel:
    """log prior + log likelihood over a unit-cube reparametrization."""

    def __init__(self, dims, to_theta, log_weight):
        self.dims = dims
        self.to_theta = to_theta      # (M, dims) in cube -> (M, j) coefficients
        self.log_weight = log_weight  # cube points, thetas -> (M,) log integrand


def _simplex_reparam(a: np.ndarray):
    """Stick-breaking map from the (j-1)-cube to the simplex, with the
    Dirichlet density and jacobian folded into the log weight."""
    j = a.size
    norm = float(gammaln(a.sum()) - gammaln(a).sum())

    def to_theta(u):
        remaining = np.ones(u.shape[0])
        theta = np.empty((u.shape[0], j))
        for i in range(j - 1):
            theta[:, i] = u[:, i] * remaining
            remaining = remaining * (1.0 - u[:, i])
        theta[:, j - 1] = remaining
        return theta

    def log_weight(u, theta):
        with np.errstate(divide="ignore"):
            log_theta = np.log(theta)
        dens = norm + ((a - 1.0) * log_theta).sum(axis=1)
        jac = np.zeros(u.shape[0])
        for i in range(j - 2):
            jac += (j - 2 - i) * np.log1p(-u[:, i])
        return dens + jac

    return _BruteModel(j - 1, to_theta, log_weight)


def _gamma_reparam(a: np.ndarray, b: np.ndarray, max_extra_rate: float,
                   max_extra_shape: float):
    """Map the cube to (0, inf)^j through y = log(theta) over a bracket wide
    enough for prior and posterior mass; density and jacobian in the weight."""
    j = a.size
    lo = np.log(gammaincinv(a, _TAIL) / (b + max_extra_rate))
    hi = np.log(gammaincinv(a + max_extra_shape, 1.0 - _TAIL) / b)
    width = hi - lo

    def to_theta(u):
        return np.exp(lo[None, :] + u * width[None, :])

    def log_weight(u, theta):
        dens = (a * np.log(b) - gammaln(a) + a * np.log(theta) - b * theta).sum(axis=1)
        return dens + float(np.log(width).sum())  # jacobian theta merged: (a-1)+1

    return _BruteModel(j, to_theta, log_weight)


def _beta_reparam(a: np.ndarray, b: np.ndarray):
    j = a.size
    norm = float((gammaln(a + b) - gammaln(a) - gammaln(b)).sum())

    def to_theta(u):
        return u

    def log_weight(u, theta):
        return norm + ((a - 1.0) * np.log(theta)
                       + (b - 1.0) * np.log1p(-theta)).sum(axis=1)

    return _BruteModel(j, to_theta, log_weight)


def _check_caps(j: int, n_obs: int):
    if j > _MAX_BRUTE_DIM:
        raise ConfigError(f"brute-force oracle capped at dimension {_MAX_BRUTE_DIM}")
    if n_obs > _MAX_BRUTE_OBS:
        raise ConfigError(f"brute-force oracle capped at {_MAX_BRUTE_OBS} observations")


def _brute_ratio(model: _BruteModel, log_lik, g, tol: float,
                 orders=(12, 24, 48, 96, 144)) -> tuple[float, float]:
    """Returns (ratio E[g * lik] / E[lik], log E[lik]) with order doubling."""
    if model.dims == 0:
        theta = model.to_theta(np.zeros((1, 0)))
        ll = float(log_lik(theta)[0])
        return float(g(theta)[0]), ll
    prev = None
    for order in orders:
        pts, w = _tensor_grid(model.dims, order)
        theta = model.to_theta(pts)
        logs = model.log_weight(pts, theta) + log_lik(theta)
        shift = float(np.max(logs))
        core = np.exp(logs - shift) * w
        den = float(core.sum())
        num = float((core * g(theta)).sum())
        if den <= 0.0:
            raise NumericalError("brute-force denominator underflowed")
        ratio = num / den
        log_ev = shift + np.log(den)
        if prev is not None and abs(ratio - prev) <= tol * max(abs(ratio), 1e-300):
            return ratio, log_ev
        prev = ratio
    raise NumericalError("brute-force quadrature did not converge")


def _density_log_lik(q: int, j: int, data: np.ndarray):
    scaled = make_scaled(basis_with_dim(q, j))
    first, vals = eval_scaled_many(scaled, data)
    rows = np.zeros((len(data), j))
    cols = first[:, None] + np.arange(q)[None, :]
    rows[np.arange(len(data))[:, None], cols] = vals

    def log_lik(theta):
        dens = theta @ rows.T
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(dens, 1e-300)).sum(axis=1)

    return log_lik


def brute_posterior(kind: str, *, q: int, j: int, data, prior, g,
                    tol: float = 1e-3) -> float:
    """Posterior expectation E[g(theta) | data] for a tiny model by direct
    quadrature over the coefficient prior.

    ``kind`` is one of ``density``, ``binary``, ``poisson``, ``spectral``;
    ``g`` maps an (M, j) block of coefficient vectors to (M,) values.  See
    :func:`brute_gauss_regression` for the Gaussian-noise model.  Dirichlet
    concentrations well below one put boundary singularities beyond the node
    ladder; non-convergence raises rather than returning a wrong value.
    """
    ratio, _ = _brute_moments(kind, q=q, j=j, data=data, prior=prior, g=g, tol=tol)
    return ratio


def brute_log_evidence(kind: str, *, q: int, j: int, data, prior,
                       tol: float = 1e-3) -> float:
    """log E[likelihood] under the coefficient prior, for dimension mixing."""
    _, log_ev = _brute_moments(kind, q=q, j=j, data=data, prior=prior,
                               g=lambda th: np.ones(th.shape[0]), tol=tol)
    return log_ev


def _brute_moments(kind, *, q, j, data, prior, g, tol):
    if kind == "density":
        data = np.asarray(data, dtype=float)
        _check_caps(j, data.size)
        if not isinstance(prior, DirichletPrior):
            raise ConfigError("density oracle expects a Dirichlet prior")
        model = _simplex_reparam(prior.params_for(j))
        return _brute_ratio(model, _density_log_lik(q, j, data), g, tol)

    basis = basis_with_dim(q, j)
    if kind == "binary":
        z, x = (np.asarray(v, dtype=float) for v in data)
        _check_caps(j, z.size)
        if not isinstance(prior, BetaIndepPrior):
            raise ConfigError("binary oracle expects a Beta prior")
        rows = dense_matrix(basis, z)
        xb = x.astype(bool)

        def log_lik(theta):
            f = theta @ rows.T
            f = np.clip(f, 1e-300, 1.0 - 1e-16)
            return np.where(xb[None, :], np.log(f), np.log1p(-f)).sum(axis=1)

        a, b = prior.params_for(j)
        return _brute_ratio(_beta_reparam(a, b), log_lik, g, tol)

    if kind == "poisson":
        z, x = data
        z = np.asarray(z, dtype=float)
        x = np.asarray(x)
        _check_caps(j, z.size)
        if not isinstance(prior, GammaIndepPrior):
            raise ConfigError("poisson oracle expects a Gamma prior")
        rows = dense_matrix(basis, z)
        a, b = prior.params_for(j)
        lfact = float(gammaln(x + 1.0).sum())

        def log_lik(theta):
            f = np.maximum(theta @ rows.T, 1e-300)
            return (x[None, :] * np.log(f) - f).sum(axis=1) - lfact

        model = _gamma_reparam(a, b, max_extra_rate=float(rows.sum()),
                               max_extra_shape=float(np.sum(x)) + 2.0)
        return _brute_ratio(model, log_lik, g, tol)

    if kind == "spectral":
        freqs, ords = (np.asarray(v, dtype=float) for v in data)
        _check_caps(j, freqs.size)
        if not isinstance(prior, GammaIndepPrior):
            raise ConfigError("spectral oracle expects a Gamma prior")
        rows = dense_matrix(basis, freqs)
        a, b = prior.params_for(j)

        def log_lik(theta):
            inv_f = np.maximum(theta @ rows.T, 1e-300)
            return (np.log(inv_f) - ords[None, :] * inv_f).sum(axis=1)

        model = _gamma_reparam(a, b, max_extra_rate=float((ords[:, None] * rows).sum()),
                               max_extra_shape=float(freqs.size) + 2.0)
        return _brute_ratio(model, log_lik, g, tol)

    raise ConfigError(f"unknown brute-force model kind {kind!r}")


def brute_gauss_regression(*, q: int, j: int, z, x, tau2: float,
                           noise_shape: float, noise_rate: float, g,
                           tol: float = 1e-3) -> float:
    """E[g(theta) | data] for Gaussian regression with iid N(0, sigma^2 tau2)
    coefficients and inverse-gamma noise, by quadrature over (theta, sigma^2)
    with sigma^2 on a log scale."""
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_caps(j, z.size)
    basis = basis_with_dim(q, j)
    rows = dense_matrix(basis, z)
    n = z.size

    lam = rows.T @ rows + np.eye(j) / tau2
    center = np.linalg.solve(lam, rows.T @ x)
    s2_lo = noise_rate / gammaincinv(noise_shape, 1.0 - _TAIL)
    s2_hi = (noise_rate + 0.5 * float(x @ x) + 1.0) / gammaincinv(
        noise_shape + 0.5 * n + 1.0, _TAIL)
    y_lo, y_hi = np.log(s2_lo), np.log(s2_hi)
    # theta scales with sigma: theta = center + sigma * v keeps one v-box
    # valid for every noise level
    half = 12.0 * np.sqrt(np.max(np.diag(np.linalg.inv(lam))) + tau2)

    def to_params(u):
        s2 = np.exp(y_lo + u[:, j] * (y_hi - y_lo))
        v = (2.0 * u[:, :j] - 1.0) * half
        theta = center[None, :] + np.sqrt(s2)[:, None] * v
        return theta, s2

    def log_post(u):
        theta, s2 = to_params(u)
        resid = x[None, :] - theta @ rows.T
        loglik = (-0.5 * n * np.log(2.0 * np.pi * s2)
                  - 0.5 * (resid ** 2).sum(axis=1) / s2)
        logprior_theta = (-0.5 * j * np.log(2.0 * np.pi * s2 * tau2)
                          - 0.5 * (theta ** 2).sum(axis=1) / (s2 * tau2))
        logprior_s2 = (noise_shape * np.log(noise_rate) - gammaln(noise_shape)
                       - (noise_shape + 1.0) * np.log(s2) - noise_rate / s2
                       + np.log(s2))  # + log s2: jacobian of the log transform
        log_jac = j * (np.log(2.0 * half) + 0.5 * np.log(s2)) + np.log(y_hi - y_lo)
        return loglik + logprior_theta + logprior_s2 + log_jac

    orders = (16, 32, 64) if j + 1 <= 3 else (10, 20, 40)
    prev = None
    for order in orders:
        pts, w = _tensor_grid(j + 1, order)
        logs = log_post(pts)
        shift = float(np.max(logs))
        core = np.exp(logs - shift) * w
        theta, _ = to_params(pts)
        den = float(core.sum())
        num = float((core * g(theta)).sum())
        ratio = num / den
        if prev is not None and abs(ratio - prev) <= tol * max(abs(ratio), 1e-300):
            return ratio
        prev = ratio
    raise NumericalError("gauss regression oracle did not converge")


# ---------------------------------------------------------------------------
# approximation-rate slope measurement


@dataclass(frozen=True)
class RateCheckConfig:
    """Sup/L2 approximation error decay of least-squares spline fits."""

    target: Callable[[np.ndarray], np.ndarray]
    smoothness: float
    q: int
    dims: tuple[int, ...]
    norm: str = "sup"
    grid_size: int = 10000

    def __post_init__(self):
        if self.smoothness <= 0.0 or self.smoothness > self.q:
            raise ConfigError("rate check needs 0 < smoothness <= q")
        if len(self.dims) < 3 or any(b <= a for a, b in zip(self.dims, self.dims[1:])):
            raise ConfigError("dimension ladder must be >= 3 strictly increasing values")
        if self.norm not in ("sup", "l2"):
            raise ConfigError(f"unknown norm {self.norm!r}")


def approx_rate_slope(config: RateCheckConfig) -> float:
    """Fitted slope of log approximation error against log dimension."""
    xs = np.linspace(0.0, 1.0, config.grid_size)
    ys = config.target(xs)
    log_j, log_err = [], []
    for j in config.dims:
        basis = basis_with_dim(config.q, j)
        coef = least_squares_fit(basis, xs, ys)
        resid = dense_matrix(basis, xs) @ coef - ys
        err = float(np.max(np.abs(resid))) if config.norm == "sup" \
            else float(np.sqrt(np.mean(resid ** 2)))
        if err < 1e-13:  # machine floor: exact representation, uninformative
            continue
        log_j.append(np.log(j))
        log_err.append(np.log(err))
    if len(log_j) < 3:
        raise NumericalError("fewer than 3 usable ladder points above machine floor")
    slope = np.polyfit(log_j, log_err, 1)[0]
    return float(slope)
