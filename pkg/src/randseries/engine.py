"""Ratio-of-sums posterior engine.

Every closed-form posterior mean in this package has the same shape: a sum
over index configurations carrying an extra evaluation slot, divided by the
same sum without that slot, both mixed over the basis dimension j.  A
configuration assigns each observation slot one candidate (a basis index, or
a weak composition of a count over the supported indices); its weight is the
product of slot weights times a conjugate marginal factor that separates
across basis indices.

Two evaluation routes are provided.  Exact mode enumerates configurations
depth-first with streaming log-sum-exp.  Monte Carlo mode draws candidates
independently per slot, proportional to their weights, so the per-draw
integrand is the pure marginal factor; the evaluation slot is always summed
analytically (Rao-Blackwellized) given the drawn observation assignment, the
numerator and denominator share draws, and the standard error comes from the
delta method for a ratio of means.  All accumulation happens in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.special import betaln, gammaln, logsumexp

from .errors import ConfigError, EnumerationBudgetError, NumericalError
from .priors import DimensionPrior
from .splinebasis import ScaledBasis, eval_basis_many, eval_scaled_many

DEFAULT_ENUMERATION_BUDGET = 10**8


# ---------------------------------------------------------------------------
# slots and candidate enumeration


def enumerate_compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All weak compositions of ``total`` into ``parts`` nonnegative integers,
    in lexicographic order.  There are C(total+parts-1, parts-1) of them.
    """
    if parts < 1:
        raise ConfigError(f"composition needs at least one part, got {parts}")
    if total < 0:
        raise ConfigError(f"composition total must be nonnegative, got {total}")
    if parts == 1:
        return [(total,)]
    out = []
    for head in range(total + 1):
        for rest in enumerate_compositions(total - head, parts - 1):
            out.append((head,) + rest)
    return out


def composition_unrank(total: int, parts: int, rank: int) -> tuple[int, ...]:
    """The ``rank``-th composition in the lexicographic order above."""
    out = []
    remaining = total
    for pos in range(parts - 1):
        head = 0
        while True:
            block = math.comb(remaining - head + parts - pos - 2, parts - pos - 2)
            if rank < block:
                break
            rank -= block
            head += 1
        out.append(head)
        remaining -= head
    out.append(remaining)
    return tuple(out)


@dataclass(frozen=True)
class Slot:
    """One observation's candidate set.

    ``support`` holds the basis indices with positive weight at the slot's
    location (at most q, consecutive).  For an index slot each candidate is a
    single index, adding one count and ``tally`` to that index's statistics.
    For a composition slot the candidates are the weak compositions of the
    count ``tally`` over the support, with weight prod(w_i^s_i / s_i!).
    """

    support: tuple[int, ...]
    weights: tuple[float, ...]
    tally: int = 0
    composition: bool = False

    def __post_init__(self):
        if len(self.support) != len(self.weights) or not self.support:
            raise ConfigError("slot needs matching, nonempty support and weights")
        if min(self.weights) <= 0.0:
            raise ConfigError("slot weights must be positive (drop zero candidates)")

    @property
    def weight_sum(self) -> float:
        return float(sum(self.weights))

    @property
    def candidate_count(self) -> int:
        if self.composition:
            m = len(self.support)
            return math.comb(self.tally + m - 1, m - 1)
        return len(self.support)

    def candidates(self):
        """Yield (indices, count increments, tally increments, log weight)."""
        if not self.composition:
            for k, w in zip(self.support, self.weights):
                yield (k,), (1,), (self.tally,), math.log(w)
            return
        logw = np.log(self.weights)
        for svec in enumerate_compositions(self.tally, len(self.support)):
            lw = sum(s * lw_i - gammaln(s + 1) for s, lw_i in zip(svec, logw))
            yield self.support, svec, (0,) * len(self.support), float(lw)


def build_slot(basis, location: float, *, tally: int = 0,
               composition: bool = False) -> Slot:
    """Slot for an observation at ``location`` under a (scaled) basis."""
    if isinstance(basis, ScaledBasis):
        first, vals = eval_scaled_many(basis, [location])
    else:
        first, vals = eval_basis_many(basis, [location])
    vals = vals[0]
    keep = vals > 0.0
    support = tuple(int(first[0]) + i for i in np.nonzero(keep)[0])
    weights = tuple(float(v) for v in vals[keep])
    if not support:
        raise ConfigError(f"all-zero slot weights at location {location}")
    return Slot(support=support, weights=weights, tally=tally,
                composition=composition)


# ---------------------------------------------------------------------------
# marginal laws: the per-index conjugate factors phi_k(count, tally)
# (phi is zero at empty statistics; per-dimension constants live in log_const)


class DirichletLaw:
    """Dirichlet integral factors: phi_k(c) = lgamma(a_k + c) - lgamma(a_k);
    a shared constant lgamma(A) - lgamma(A + mass) accounts for the prior
    normalizer and the growing total count."""

    def __init__(self, concentration: np.ndarray):
        self.a = np.asarray(concentration, dtype=float)
        self.a_sum = float(self.a.sum())

    uses_tallies = False

    def scalar_phi(self, max_count: int) -> Callable[[int, int, int], float]:
        table = gammaln(self.a[:, None] + np.arange(max_count + 1)[None, :])
        table -= gammaln(self.a)[:, None]

        def phi(k: int, count: int, tally: int) -> float:
            return table[k, count]

        return phi

    def phi_rows(self, counts: np.ndarray, tallies) -> np.ndarray:
        return (gammaln(self.a[None, :] + counts) - gammaln(self.a)[None, :]).sum(axis=1)

    def increments(self, ks, counts, tallies, count_inc: int, tally_inc: int):
        a = self.a[ks][None, :]
        return gammaln(a + counts + count_inc) - gammaln(a + counts)

    def log_const(self, mass: int) -> float:
        return float(gammaln(self.a_sum) - gammaln(self.a_sum + mass))


class GammaLaw:
    """Gamma integral factors against exposure rates r_k:
    phi_k(c) = lgamma(a_k + c) - lgamma(a_k) - c log r_k, with the
    count-free constant sum(a_k log(b_k / r_k))."""

    def __init__(self, shape: np.ndarray, prior_rate: np.ndarray,
                 posterior_rate: np.ndarray):
        self.a = np.asarray(shape, dtype=float)
        self.b = np.asarray(prior_rate, dtype=float)
        self.r = np.asarray(posterior_rate, dtype=float)
        if np.any(self.r <= 0.0):
            raise ConfigError("posterior rates must be positive")
        self.log_r = np.log(self.r)

    uses_tallies = False

    def scalar_phi(self, max_count: int) -> Callable[[int, int, int], float]:
        counts = np.arange(max_count + 1)[None, :]
        table = (gammaln(self.a[:, None] + counts) - gammaln(self.a)[:, None]
                 - counts * self.log_r[:, None])

        def phi(k: int, count: int, tally: int) -> float:
            return table[k, count]

        return phi

    def phi_rows(self, counts: np.ndarray, tallies) -> np.ndarray:
        a = self.a[None, :]
        return (gammaln(a + counts) - gammaln(a) - counts * self.log_r[None, :]).sum(axis=1)

    def increments(self, ks, counts, tallies, count_inc: int, tally_inc: int):
        a = self.a[ks][None, :]
        return (gammaln(a + counts + count_inc) - gammaln(a + counts)
                - count_inc * self.log_r[ks][None, :])

    def log_const(self, mass: int) -> float:
        return float((self.a * (np.log(self.b) - self.log_r)).sum())


class BetaOccupancyLaw:
    """Beta integral factors for 0/1 responses routed to indices:
    phi_k(c, t) = lbeta(a_k + t, b_k + c - t) - lbeta(a_k, b_k)."""

    def __init__(self, a: np.ndarray, b: np.ndarray):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)

    uses_tallies = True

    def scalar_phi(self, max_count: int) -> Callable[[int, int, int], float]:
        c = np.arange(max_count + 1)
        t = np.arange(max_count + 1)
        cc, tt = np.meshgrid(c, t, indexing="ij")
        base = betaln(self.a, self.b)
        tables = []
        for k in range(self.a.size):
            with np.errstate(invalid="ignore"):
                tab = betaln(self.a[k] + tt, self.b[k] + cc - tt) - base[k]
            tab[tt > cc] = np.nan  # unreachable: successes cannot exceed count
            tables.append(tab)
        stacked = np.stack(tables)

        def phi(k: int, count: int, tally: int) -> float:
            return stacked[k, count, tally]

        return phi

    def phi_rows(self, counts: np.ndarray, tallies: np.ndarray) -> np.ndarray:
        a, b = self.a[None, :], self.b[None, :]
        return (betaln(a + tallies, b + counts - tallies) - betaln(a, b)).sum(axis=1)

    def increments(self, ks, counts, tallies, count_inc: int, tally_inc: int):
        a, b = self.a[ks][None, :], self.b[ks][None, :]
        return (betaln(a + tallies + tally_inc,
                       b + counts + count_inc - tallies - tally_inc)
                - betaln(a + tallies, b + counts - tallies))

    def log_const(self, mass: int) -> float:
        return 0.0


# ---------------------------------------------------------------------------
# the assembled functional: one component per candidate dimension


@dataclass(frozen=True)
class JComponent:
    """Everything needed to evaluate one dimension's contribution."""

    dim: int
    law: object
    slots: tuple[Slot, ...]
    eval_slot: Callable[[float], Slot]
    eval_tally: int = 0

    @property
    def mass(self) -> int:
        """Total count mass the observation slots add to the statistics."""
        return sum(s.tally if s.composition else 1 for s in self.slots)


@dataclass(frozen=True)
class RatioSumSpec:
    """A ratio-of-sums posterior functional mixed over the dimension prior."""

    dim_prior: DimensionPrior
    components: Mapping[int, JComponent]

    def __post_init__(self):
        missing = [j for j in self.dim_prior.support if j not in self.components]
        if missing:
            raise ConfigError(f"spec lacks components for dimensions {missing}")

    @property
    def j_values(self) -> tuple[int, ...]:
        return tuple(self.dim_prior.support)


@dataclass(frozen=True)
class Exact:
    """Exact enumeration, bounded by a configuration-count budget."""

    budget: int = DEFAULT_ENUMERATION_BUDGET


@dataclass(frozen=True)
class MonteCarlo:
    """Seeded importance-sampling evaluation with ``n_draws`` configurations."""

    n_draws: int
    seed: int = 0
    rao_blackwell: bool = True
    sampling: str = "weighted"

    def __post_init__(self):
        if self.n_draws < 2:
            raise ConfigError(f"Monte Carlo needs at least 2 draws, got {self.n_draws}")
        if self.sampling not in ("weighted", "uniform"):
            raise ConfigError(f"unknown sampling scheme {self.sampling!r}")


@dataclass(frozen=True)
class RatioResult:
    """A single evaluated ratio.  ``stderr`` is zero in exact mode; the
    per-dimension log denominator terms feed the dimension posterior."""

    value: float
    stderr: float
    dim_log_terms: dict[int, float]
    n_draws: int | None = None
    seed: int | None = None


@dataclass(frozen=True)
class PosteriorEstimate:
    """Posterior mean curve over a grid with diagnostics."""

    grid: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    variance: np.ndarray | None
    dim_posterior: dict[int, float]
    method: str
    n_draws: int | None = None
    seed: int | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_stderr(self) -> float:
        return float(np.max(self.stderr)) if self.stderr.size else 0.0


# ---------------------------------------------------------------------------
# exact enumeration


class _LogSumExp:
    """Streaming log-sum-exp with a running maximum."""

    __slots__ = ("vmax", "acc")

    def __init__(self):
        self.vmax = -math.inf
        self.acc = 0.0

    def add(self, value: float):
        if value == -math.inf:
            return
        if value <= self.vmax:
            self.acc += math.exp(value - self.vmax)
        else:
            self.acc = self.acc * math.exp(self.vmax - value) + 1.0
            self.vmax = value

    def result(self) -> float:
        if self.vmax == -math.inf:
            return -math.inf
        return self.vmax + math.log(self.acc)


@dataclass(frozen=True)
class ExactTables:
    """Per-dimension enumeration results, reusable across evaluation points.

    ``log_num[j][k]`` is the log configuration sum with the evaluation slot
    pinned to index k (its weight excluded); ``log_num2[j][k, l]`` likewise
    with two evaluation slots.  Dimension constants and the prior are applied
    at assembly time.
    """

    log_den: dict[int, float]
    log_num: dict[int, np.ndarray]
    log_num2: dict[int, np.ndarray] | None


def _enumerate_component(comp: JComponent, *, second_moment: bool,
                         budget: int) -> tuple[float, np.ndarray, np.ndarray | None]:
    total = 1
    for slot in comp.slots:
        total *= slot.candidate_count
        if total > budget:
            raise EnumerationBudgetError(
                f"exact enumeration needs more than {budget} configurations "
                f"for dimension {comp.dim}; use Monte Carlo"
            )
    j = comp.dim
    phi = comp.law.scalar_phi(comp.mass + 2)
    counts = [0] * j
    tallies = [0] * j
    et = comp.eval_tally
    den = _LogSumExp()
    num = [_LogSumExp() for _ in range(j)]
    num2 = [[_LogSumExp() for _ in range(j)] for _ in range(j)] if second_moment else None
    slot_candidates = [list(s.candidates()) for s in comp.slots]
    n_slots = len(slot_candidates)

    def leaf(acc: float):
        den.add(acc)
        deltas = [phi(k, counts[k] + 1, tallies[k] + et) - phi(k, counts[k], tallies[k])
                  for k in range(j)]
        for k in range(j):
            num[k].add(acc + deltas[k])
        if num2 is not None:
            for k in range(j):
                d2 = phi(k, counts[k] + 2, tallies[k] + 2 * et) \
                    - phi(k, counts[k], tallies[k])
                num2[k][k].add(acc + d2)
                for l in range(k + 1, j):
                    both = acc + deltas[k] + deltas[l]
                    num2[k][l].add(both)
                    num2[l][k].add(both)

    def descend(depth: int, acc: float):
        if depth == n_slots:
            leaf(acc)
            return
        for idxs, cnts, tals, logw in slot_candidates[depth]:
            delta = 0.0
            for k, c, t in zip(idxs, cnts, tals):
                delta += phi(k, counts[k] + c, tallies[k] + t) \
                    - phi(k, counts[k], tallies[k])
                counts[k] += c
                tallies[k] += t
            descend(depth + 1, acc + logw + delta)
            for k, c, t in zip(idxs, cnts, tals):
                counts[k] -= c
                tallies[k] -= t

    descend(0, 0.0)
    num_arr = np.array([acc.result() for acc in num])
    num2_arr = None
    if num2 is not None:
        num2_arr = np.array([[num2[k][l].result() for l in range(j)] for k in range(j)])
    return den.result(), num_arr, num2_arr


def exact_tables(spec: RatioSumSpec, *, second_moment: bool = False,
                 budget: int = DEFAULT_ENUMERATION_BUDGET) -> ExactTables:
    log_den, log_num, log_num2 = {}, {}, ({} if second_moment else None)
    for j in spec.j_values:
        den, num, num2 = _enumerate_component(
            spec.components[j], second_moment=second_moment, budget=budget)
        log_den[j] = den
        log_num[j] = num
        if second_moment:
            log_num2[j] = num2
    return ExactTables(log_den=log_den, log_num=log_num, log_num2=log_num2)


def _den_terms(spec: RatioSumSpec, tables: ExactTables) -> dict[int, float]:
    out = {}
    for j in spec.j_values:
        comp = spec.components[j]
        out[j] = (spec.dim_prior.log_pmf(j) + comp.law.log_const(comp.mass)
                  + tables.log_den[j])
    return out


def _exact_value(spec: RatioSumSpec, tables: ExactTables, den_terms: dict[int, float],
                 x: float, *, moment: int = 1) -> float:
    terms = []
    for j in spec.j_values:
        comp = spec.components[j]
        slot0 = comp.eval_slot(x)
        lp = spec.dim_prior.log_pmf(j)
        cnum = comp.law.log_const(comp.mass + moment)
        if moment == 1:
            rows = tables.log_num[j]
            for k, w in zip(slot0.support, slot0.weights):
                terms.append(lp + cnum + math.log(w) + rows[k])
        else:
            grid2 = tables.log_num2[j]
            for k, wk in zip(slot0.support, slot0.weights):
                for l, wl in zip(slot0.support, slot0.weights):
                    terms.append(lp + cnum + math.log(wk) + math.log(wl) + grid2[k, l])
    log_num = logsumexp(terms)
    log_den = logsumexp(list(den_terms.values()))
    if not np.isfinite(log_den):
        raise NumericalError("denominator vanished in exact evaluation")
    return float(np.exp(log_num - log_den))


def exact_ratio(spec: RatioSumSpec, x: float,
                budget: int = DEFAULT_ENUMERATION_BUDGET) -> RatioResult:
    """Exact posterior ratio at ``x`` by full enumeration; stderr is zero."""
    tables = exact_tables(spec, budget=budget)
    den_terms = _den_terms(spec, tables)
    value = _exact_value(spec, tables, den_terms, x)
    return RatioResult(value=value, stderr=0.0, dim_log_terms=den_terms)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class McDraws:
    """Shared configuration draws: one (counts, tallies) block per dimension.

    The denominator depends only on these draws, never on the evaluation
    point, so one ``McDraws`` serves a whole grid with an identical
    denominator estimate.
    """

    n_draws: int
    seed: int
    sampling: str
    counts: dict[int, np.ndarray]
    tallies: dict[int, np.ndarray]
    log_base: dict[int, np.ndarray]
    log_norm: dict[int, float]


def mc_draws(spec: RatioSumSpec, n_draws: int, seed: int,
             sampling: str = "weighted") -> McDraws:
    rng = np.random.default_rng(seed)
    counts, tallies, log_base, log_norm = {}, {}, {}, {}
    rows = np.arange(n_draws)
    for j in spec.j_values:
        comp = spec.components[j]
        C = np.zeros((n_draws, j), dtype=np.int64)
        T = np.zeros((n_draws, j), dtype=np.int64)
        extra = np.zeros(n_draws)
        norm = 0.0
        for slot in comp.slots:
            w = np.asarray(slot.weights)
            m = w.size
            if slot.composition:
                if sampling == "weighted":
                    drawn = rng.multinomial(slot.tally, w / w.sum(), size=n_draws)
                    norm += slot.tally * math.log(w.sum()) - float(gammaln(slot.tally + 1))
                else:
                    ranks = rng.integers(slot.candidate_count, size=n_draws)
                    drawn = np.array([composition_unrank(slot.tally, m, int(r))
                                      for r in ranks])
                    logw = np.log(w)
                    extra += drawn @ logw - gammaln(drawn + 1.0).sum(axis=1)
                    norm += math.log(slot.candidate_count)
                C[:, list(slot.support)] += drawn
            else:
                if sampling == "weighted":
                    cum = np.cumsum(w / w.sum())
                    picks = np.searchsorted(cum, rng.random(n_draws))
                    picks = np.minimum(picks, m - 1)
                    norm += math.log(w.sum())
                else:
                    picks = rng.integers(m, size=n_draws)
                    extra += np.log(w)[picks]
                    norm += math.log(m)
                ks = np.asarray(slot.support)[picks]
                C[rows, ks] += 1
                if slot.tally:
                    T[rows, ks] += slot.tally
        counts[j] = C
        tallies[j] = T
        log_base[j] = comp.law.phi_rows(C, T) + extra
        log_norm[j] = norm
    return McDraws(n_draws=n_draws, seed=seed, sampling=sampling, counts=counts,
                   tallies=tallies, log_base=log_base, log_norm=log_norm)


def _mc_log_den_draws(spec: RatioSumSpec, draws: McDraws) -> np.ndarray:
    """(n_draws,) log denominator term per draw, summed over dimensions."""
    cols = []
    for j in spec.j_values:
        comp = spec.components[j]
        scale = (spec.dim_prior.log_pmf(j) + comp.law.log_const(comp.mass)
                 + draws.log_norm[j])
        cols.append(scale + draws.log_base[j])
    return logsumexp(np.column_stack(cols), axis=1)


def _mc_log_num_draws(spec: RatioSumSpec, draws: McDraws, x: float) -> np.ndarray:
    """(n_draws,) log numerator term per draw, evaluation slot summed out."""
    cols = []
    for j in spec.j_values:
        comp = spec.components[j]
        slot0 = comp.eval_slot(x)
        ks = np.asarray(slot0.support)
        inc = comp.law.increments(ks, draws.counts[j][:, ks], draws.tallies[j][:, ks],
                                  1, comp.eval_tally)
        slot_sum = logsumexp(np.log(np.asarray(slot0.weights))[None, :] + inc, axis=1)
        scale = (spec.dim_prior.log_pmf(j) + comp.law.log_const(comp.mass + 1)
                 + draws.log_norm[j])
        cols.append(scale + draws.log_base[j] + slot_sum)
    return logsumexp(np.column_stack(cols), axis=1)


def _ratio_with_stderr(log_num_t: np.ndarray, log_den_t: np.ndarray) -> tuple[float, float]:
    """Delta-method ratio of per-draw means, computed under a common shift."""
    if not np.any(np.isfinite(log_den_t)):
        raise NumericalError("all Monte Carlo denominator draws underflowed")
    shift = max(np.max(log_num_t), np.max(log_den_t))
    n = np.exp(log_num_t - shift)
    d = np.exp(log_den_t - shift)
    n_mean, d_mean = float(n.mean()), float(d.mean())
    if d_mean <= 0.0:
        raise NumericalError("degenerate Monte Carlo denominator estimate")
    ratio = n_mean / d_mean
    if np.ptp(n) == 0.0 and np.ptp(d) == 0.0:
        return ratio, 0.0
    n_draws = n.size
    nc = n - n_mean
    dc = d - d_mean
    s_nn = float(nc @ nc) / (n_draws - 1)
    s_dd = float(dc @ dc) / (n_draws - 1)
    s_nd = float(nc @ dc) / (n_draws - 1)
    var = (s_nn - 2.0 * ratio * s_nd + ratio * ratio * s_dd) / (n_draws * d_mean * d_mean)
    return ratio, math.sqrt(max(var, 0.0))


def mc_ratio(spec: RatioSumSpec, x: float, n_draws: int, seed: int, *,
             rao_blackwell: bool = True, sampling: str = "weighted") -> RatioResult:
    """Monte Carlo posterior ratio at ``x`` with a delta-method stderr.

    Draws are shared between numerator and denominator and are a
    deterministic function of the seed alone, so the denominator estimate is
    identical across evaluation points.  ``rao_blackwell=False`` samples the
    evaluation slot too instead of summing it analytically (kept for
    fidelity experiments; higher variance).
    """
    method = MonteCarlo(n_draws=n_draws, seed=seed, sampling=sampling)
    draws = mc_draws(spec, method.n_draws, method.seed, method.sampling)
    log_den_t = _mc_log_den_draws(spec, draws)
    if rao_blackwell:
        log_num_t = _mc_log_num_draws(spec, draws, x)
    else:
        log_num_t = _mc_log_num_sampled(spec, draws, x)
    value, stderr = _ratio_with_stderr(log_num_t, log_den_t)
    return RatioResult(value=value, stderr=stderr,
                       dim_log_terms=_mc_dim_terms(spec, draws),
                       n_draws=n_draws, seed=seed)


def _mc_log_num_sampled(spec: RatioSumSpec, draws: McDraws, x: float) -> np.ndarray:
    # evaluation-slot candidates sampled from a stream derived from the seed,
    # keeping the shared observation draws untouched
    rng = np.random.default_rng([draws.seed, 0x5107])
    cols = []
    for j in spec.j_values:
        comp = spec.components[j]
        slot0 = comp.eval_slot(x)
        w = np.asarray(slot0.weights)
        cum = np.cumsum(w / w.sum())
        picks = np.minimum(np.searchsorted(cum, rng.random(draws.n_draws)), w.size - 1)
        ks = np.asarray(slot0.support)[picks]
        rows = np.arange(draws.n_draws)
        inc_all = comp.law.increments(np.arange(j), draws.counts[j], draws.tallies[j],
                                      1, comp.eval_tally)
        scale = (spec.dim_prior.log_pmf(j) + comp.law.log_const(comp.mass + 1)
                 + draws.log_norm[j] + math.log(w.sum()))
        cols.append(scale + draws.log_base[j] + inc_all[rows, ks])
    return logsumexp(np.column_stack(cols), axis=1)


def _mc_dim_terms(spec: RatioSumSpec, draws: McDraws) -> dict[int, float]:
    out = {}
    log_n = math.log(draws.n_draws)
    for j in spec.j_values:
        comp = spec.components[j]
        scale = (spec.dim_prior.log_pmf(j) + comp.law.log_const(comp.mass)
                 + draws.log_norm[j])
        out[j] = float(scale + logsumexp(draws.log_base[j]) - log_n)
    return out


# ---------------------------------------------------------------------------
# curve evaluation over a grid


def _softmax_dict(log_terms: dict[int, float]) -> dict[int, float]:
    keys = sorted(log_terms)
    vals = np.array([log_terms[k] for k in keys])
    if not np.any(np.isfinite(vals)):
        raise NumericalError("dimension posterior underflowed")
    probs = np.exp(vals - logsumexp(vals))
    probs /= probs.sum()
    return {k: float(p) for k, p in zip(keys, probs)}


def dimension_posterior(spec: RatioSumSpec, method=Exact()) -> dict[int, float]:
    """Posterior over the basis dimension given the data (no evaluation slot)."""
    if isinstance(method, MonteCarlo):
        draws = mc_draws(spec, method.n_draws, method.seed, method.sampling)
        return _softmax_dict(_mc_dim_terms(spec, draws))
    tables = exact_tables(spec, budget=method.budget)
    return _softmax_dict(_den_terms(spec, tables))


def _exact_curve(spec: RatioSumSpec, grid: np.ndarray, *, with_variance: bool,
                 budget: int) -> PosteriorEstimate:
    tables = exact_tables(spec, second_moment=with_variance, budget=budget)
    den_terms = _den_terms(spec, tables)
    mean = np.array([_exact_value(spec, tables, den_terms, x) for x in grid])
    variance = None
    if with_variance:
        second = np.array([_exact_value(spec, tables, den_terms, x, moment=2)
                           for x in grid])
        variance = _clamped_variance(second, mean, strict=True)
    return PosteriorEstimate(grid=grid, mean=mean, stderr=np.zeros_like(mean),
                             variance=variance,
                             dim_posterior=_softmax_dict(den_terms),
                             method="exact")


def _clamped_variance(second: np.ndarray, mean: np.ndarray, *, strict: bool) -> np.ndarray:
    var = second - mean * mean
    if strict and np.any(var < -1e-9):
        raise NumericalError("posterior variance fell below -1e-9")
    return np.maximum(var, 0.0)


def _mc_curve(spec: RatioSumSpec, grid: np.ndarray, method: MonteCarlo, *,
              with_variance: bool) -> PosteriorEstimate:
    draws = mc_draws(spec, method.n_draws, method.seed, method.sampling)
    log_den_t = _mc_log_den_draws(spec, draws)
    if not np.any(np.isfinite(log_den_t)):
        raise NumericalError("all Monte Carlo denominator draws underflowed")

    # per-(dimension, index) numerator columns; a grid point mixes them with
    # its evaluation-slot weights, so moments over draws are precomputable
    col_logs, col_owner = [], []
    for j in spec.j_values:
        comp = spec.components[j]
        scale = (spec.dim_prior.log_pmf(j) + comp.law.log_const(comp.mass + 1)
                 + draws.log_norm[j])
        inc = comp.law.increments(np.arange(j), draws.counts[j], draws.tallies[j],
                                  1, comp.eval_tally)
        col_logs.append(scale + draws.log_base[j][:, None] + inc)
        col_owner.extend((j, k) for k in range(j))
    log_m = np.concatenate(col_logs, axis=1)
    shift = max(float(np.max(log_m)), float(np.max(log_den_t)))
    m = np.exp(log_m - shift)
    d = np.exp(log_den_t - shift)

    n_draws = method.n_draws
    d_mean = float(d.mean())
    if d_mean <= 0.0:
        raise NumericalError("degenerate Monte Carlo denominator estimate")
    mu = m.mean(axis=0)
    mc = m - mu
    dc = d - d_mean
    cov_mm = (mc.T @ mc) / (n_draws - 1)
    cov_md = (mc.T @ dc) / (n_draws - 1)
    var_d = float(dc @ dc) / (n_draws - 1)

    col_of = {owner: i for i, owner in enumerate(col_owner)}
    mean = np.empty(grid.size)
    stderr = np.empty(grid.size)
    slot0_cache = {}
    for i, x in enumerate(grid):
        idx, w = [], []
        for j in spec.j_values:
            slot0 = spec.components[j].eval_slot(float(x))
            for k, wk in zip(slot0.support, slot0.weights):
                idx.append(col_of[(j, k)])
                w.append(wk)
            slot0_cache[(j, float(x))] = slot0
        idx = np.asarray(idx)
        w = np.asarray(w)
        n_mean = float(mu[idx] @ w)
        ratio = n_mean / d_mean
        s_nn = float(w @ cov_mm[np.ix_(idx, idx)] @ w)
        s_nd = float(w @ cov_md[idx])
        var = (s_nn - 2.0 * ratio * s_nd + ratio * ratio * var_d) / (
            n_draws * d_mean * d_mean)
        mean[i] = ratio
        stderr[i] = math.sqrt(max(var, 0.0))

    variance = None
    if with_variance:
        second = _mc_variance_curve(spec, draws, grid, slot0_cache, d_mean, shift)
        variance = np.maximum(second - mean * mean, 0.0)
    est = PosteriorEstimate(grid=grid, mean=mean, stderr=stderr, variance=variance,
                            dim_posterior=_softmax_dict(_mc_dim_terms(spec, draws)),
                            method="mc", n_draws=n_draws, seed=method.seed)
    return est


def _mc_variance_curve(spec, draws, grid, slot0_cache, d_mean, shift):
    """Second-moment curve E[f(x)^2 | data]; two evaluation slots, both
    summed analytically per draw."""
    second = np.zeros(grid.size)
    for j in spec.j_values:
        comp = spec.components[j]
        scale = (spec.dim_prior.log_pmf(j) + comp.law.log_const(comp.mass + 2)
                 + draws.log_norm[j])
        base = np.exp(scale + draws.log_base[j] - shift)
        e1 = np.exp(comp.law.increments(np.arange(j), draws.counts[j],
                                        draws.tallies[j], 1, comp.eval_tally))
        e2 = np.exp(comp.law.increments(np.arange(j), draws.counts[j],
                                        draws.tallies[j], 2, 2 * comp.eval_tally))
        for i, x in enumerate(grid):
            slot0 = slot0_cache.get((j, float(x)))
            if slot0 is None:
                slot0 = comp.eval_slot(float(x))
            ks = np.asarray(slot0.support)
            w = np.asarray(slot0.weights)
            lin = e1[:, ks] @ w
            sq = e1[:, ks] ** 2 @ (w * w)
            dbl = e2[:, ks] @ (w * w)
            second[i] += float(base @ (lin * lin - sq + dbl)) / draws.n_draws
    return second / d_mean


def evaluate(spec: RatioSumSpec, grid, method, *, with_variance: bool = False
             ) -> PosteriorEstimate:
    """Evaluate the posterior-mean curve over ``grid`` by the given method."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if isinstance(method, MonteCarlo):
        return _mc_curve(spec, grid, method, with_variance=with_variance)
    if isinstance(method, Exact):
        return _exact_curve(spec, grid, with_variance=with_variance,
                            budget=method.budget)
    raise ConfigError(f"unknown evaluation method {method!r}")
