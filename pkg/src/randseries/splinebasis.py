"""Uniform B-spline bases on [0, 1].

An order-q basis on K equal subintervals with q-fold repeated (clamped)
boundary knots spans a space of dimension J = q + K - 1.  The functions are
nonnegative, sum to one at every point, and at any x at most q of them are
nonzero, with consecutive indices.  Everything downstream leans on those
three facts: identity-link models stay automatically scaled and every
posterior sum ranges over at most q indices per observation.

Evaluation follows the standard triangular recurrence over the active knot
span, returning only the (at most q) nonzero values together with the index
of the first one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class SplineBasis:
    """Clamped uniform B-spline basis of order ``q`` on ``K`` subintervals."""

    q: int
    K: int
    knots: np.ndarray

    @property
    def J(self) -> int:
        """Dimension of the spanned space, q + K - 1."""
        return self.q + self.K - 1

    def __repr__(self) -> str:  # knots are derived; keep the repr short
        return f"SplineBasis(q={self.q}, K={self.K}, J={self.J})"


@dataclass(frozen=True)
class ScaledBasis:
    """Basis rescaled so each function integrates to one over [0, 1]."""

    base: SplineBasis
    integrals: np.ndarray

    @property
    def q(self) -> int:
        return self.base.q

    @property
    def J(self) -> int:
        return self.base.J


def make_basis(q: int, K: int) -> SplineBasis:
    """Build the order-``q`` basis on ``K`` equal subintervals of [0, 1]."""
    if q < 1:
        raise ConfigError(f"basis order q must be >= 1, got {q}")
    if K < 1:
        raise ConfigError(f"subinterval count K must be >= 1, got {K}")
    interior = np.arange(1, K) / K
    knots = np.concatenate([np.zeros(q), interior, np.ones(q)])
    return SplineBasis(q=q, K=K, knots=knots)


def basis_with_dim(q: int, j: int) -> SplineBasis:
    """Basis of order ``q`` with dimension exactly ``j`` (requires j >= q)."""
    if j < q:
        raise ConfigError(f"dimension {j} is below the basis order {q}")
    return make_basis(q, j - q + 1)


def eval_basis_many(basis: SplineBasis, x) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the nonzero basis functions at each point of ``x``.

    Returns ``(first, values)`` where ``values[i]`` holds the q consecutive
    basis values starting at index ``first[i]`` (zero-padded at clamped
    boundaries).  Values are nonnegative and sum to one per row.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size and (np.min(x) < 0.0 or np.max(x) > 1.0 or not np.all(np.isfinite(x))):
        raise ConfigError("evaluation points must lie in [0, 1]")
    q, K, T = basis.q, basis.K, basis.knots
    n = x.shape[0]
    # x = 1 belongs to the right-closed final subinterval
    first = np.minimum((x * K).astype(np.int64), K - 1)
    span = first + q - 1
    values = np.zeros((n, q))
    values[:, 0] = 1.0
    left = np.zeros((n, q))
    right = np.zeros((n, q))
    for j in range(1, q):
        left[:, j] = x - T[span + 1 - j]
        right[:, j] = T[span + j] - x
        saved = np.zeros(n)
        for r in range(j):
            temp = values[:, r] / (right[:, r + 1] + left[:, j - r])
            values[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        values[:, j] = saved
    # floor rounding at knot boundaries can leave values a few ulp below zero
    np.maximum(values, 0.0, out=values)
    return first, values


def eval_basis(basis: SplineBasis, x: float) -> tuple[int, np.ndarray]:
    """Sparse evaluation at a single point: (first nonzero index, q values)."""
    first, values = eval_basis_many(basis, [x])
    return int(first[0]), values[0]


def dense_matrix(basis: SplineBasis, x) -> np.ndarray:
    """Dense (len(x), J) matrix of basis values."""
    first, values = eval_basis_many(basis, x)
    n = first.shape[0]
    out = np.zeros((n, basis.J))
    cols = first[:, None] + np.arange(basis.q)[None, :]
    out[np.arange(n)[:, None], cols] = values
    return out


def basis_integrals(basis: SplineBasis) -> np.ndarray:
    """Exact integrals of each basis function over [0, 1].

    Uses the knot-difference identity: the integral of the i-th function of
    order q equals (t_{i+q} - t_i) / q.  For K >= q this reduces to the
    familiar three-piece form i/(qK), 1/K, (J-i+1)/(qK); the identity also
    covers K < q where those pieces would overlap.
    """
    T = basis.knots
    J, q = basis.J, basis.q
    return (T[q:q + J] - T[:J]) / q


def make_scaled(basis: SplineBasis) -> ScaledBasis:
    """Wrap a basis with its integrals; scaled functions integrate to one."""
    return ScaledBasis(base=basis, integrals=basis_integrals(basis))


def eval_scaled_many(scaled: ScaledBasis, x) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`eval_basis_many` but for the density-normalized basis."""
    first, values = eval_basis_many(scaled.base, x)
    cols = first[:, None] + np.arange(scaled.base.q)[None, :]
    return first, values / scaled.integrals[cols]


def gram_matrix(basis: SplineBasis, points=None) -> np.ndarray:
    """Gram matrix of pairwise products.

    With ``points=None`` entries are Lebesgue integrals over [0, 1], computed
    exactly with Gauss-Legendre nodes per subinterval.  Otherwise entries are
    averages over the empirical measure of ``points``.
    """
    if points is not None:
        m = dense_matrix(basis, points)
        return m.T @ m / len(np.atleast_1d(points))
    nodes, weights = np.polynomial.legendre.leggauss(basis.q + 1)
    gram = np.zeros((basis.J, basis.J))
    width = 1.0 / basis.K
    for k in range(basis.K):
        xs = (k + (nodes + 1.0) / 2.0) * width
        m = dense_matrix(basis, xs)
        gram += (m * (weights * width / 2.0)[:, None]).T @ m
    return gram


def least_squares_fit(basis: SplineBasis, x, y) -> np.ndarray:
    """Coefficients minimizing the mean squared error of theta'B against y
    over the grid ``x``.  The grid must be dense enough for a full-rank fit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ConfigError("grid and target samples must have equal length")
    if x.size < basis.J:
        raise ConfigError(
            f"grid of size {x.size} cannot determine {basis.J} coefficients"
        )
    design = dense_matrix(basis, x)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < basis.J:
        raise ConfigError("singular normal equations: degenerate fitting grid")
    return coef
