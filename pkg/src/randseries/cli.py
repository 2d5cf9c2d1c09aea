"""Command-line front end.

Subcommands: density, spectral, binary, poisson, linreg, funcreg, whitenoise,
repro-section9, verify.  Inputs are headered CSV files (comma separated, '.'
decimal); outputs are a grid CSV plus a JSON diagnostics file carrying the
dimension posterior, the seed, a config echo sufficient for replay, the wall
time and the largest Monte Carlo standard error.  Exit codes: 0 success, 2
configuration error, 3 numerical failure.

Prior spec grammar: dimension priors are ``family:params:j_min:j_max``
(``geom:0.15:5:12``, ``poisson:3:1:10``, ``negbin:2:0.3:1:15``); coefficient
priors are ``dirichlet:1.0``, ``gamma:1.0:1.0``, ``beta:1:1``, ``normal:1.0``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import oracle
from .density import (DensityModel, LOGISTIC, expnorm_mixture_density,
                      fit_density, sample_expnorm_mixture, transform_unbounded)
from .engine import Exact, MonteCarlo, PosteriorEstimate, exact_ratio
from .errors import ConfigError, NumericalError
from .linmodel import (FunctionalData, GaussRegressionModel, SequenceModel,
                       fit_functional, fit_gauss_regression, fit_whitenoise)
from .priors import (BetaIndepPrior, DimensionPrior, DirichletPrior,
                     GammaIndepPrior, parse_coefficient_prior,
                     parse_dimension_prior)
from .regression import BinaryModel, PoissonModel, fit_binary, fit_poisson
from .spectral import (SpectralModel, fit_inverse_spectral, periodogram,
                       spectral_density_estimate)

_REPRO_DEFAULTS = {
    "n": 50,
    "q": 3,
    "dim_prior": "geom:0.15:5:12",
    "coef_prior": "dirichlet:1.0",
    "n_draws": 1000,
    "grid_size": 1000,
}


def main(argv=None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


def run(argv) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randseries",
        description="MCMC-free Bayesian random-series estimation on B-spline bases",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, dim_default, coef_default, grid_default=200):
        p.add_argument("--data", required=True, help="input CSV path")
        p.add_argument("--out", required=True, help="output grid CSV path")
        p.add_argument("--diag", help="diagnostics JSON path (default: <out>.json)")
        p.add_argument("--q", type=int, default=3, help="B-spline order")
        p.add_argument("--dim-prior", default=dim_default,
                       help="dimension prior spec, e.g. geom:0.15:5:12")
        p.add_argument("--coef-prior", default=coef_default,
                       help="coefficient prior spec")
        p.add_argument("--grid", type=int, default=grid_default,
                       help="number of evaluation points")
        p.add_argument("--mc", type=int, metavar="N",
                       help="Monte Carlo draws (omit for exact enumeration)")
        p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
        p.add_argument("--budget", type=int, default=10**8,
                       help="exact enumeration budget")
        p.add_argument("--uniform-sampling", action="store_true",
                       help="sample candidates uniformly instead of by weight")

    p = sub.add_parser("density", help="density estimation on [0, 1]")
    common(p, dim_default="geom:0.15:5:12", coef_default="dirichlet:1.0")
    p.add_argument("--transform", choices=["none", "logistic"], default="none",
                   help="link mapping real-line data into [0, 1]")
    p.set_defaults(handler=_cmd_density)

    p = sub.add_parser("spectral", help="Whittle inverse spectral density")
    common(p, dim_default="geom:0.15:5:12", coef_default="gamma:1.0:1.0")
    p.set_defaults(handler=_cmd_spectral)

    p = sub.add_parser("binary", help="binary regression")
    common(p, dim_default="geom:0.15:5:12", coef_default="beta:1.0:1.0")
    p.set_defaults(handler=_cmd_binary)

    p = sub.add_parser("poisson", help="Poisson regression")
    common(p, dim_default="geom:0.15:5:12", coef_default="gamma:1.0:1.0")
    p.set_defaults(handler=_cmd_poisson)

    p = sub.add_parser("linreg", help="Gaussian spline regression")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--diag")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--dim-prior", default="geom:0.15:5:12")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--tau2", type=float, default=1.0)
    p.add_argument("--noise-shape", type=float, default=1.0)
    p.add_argument("--noise-rate", type=float, default=1.0)
    p.add_argument("--sigma-min", type=float, default=0.0)
    p.set_defaults(handler=_cmd_linreg)

    p = sub.add_parser("funcreg", help="scalar-on-function regression")
    p.add_argument("--data", required=True,
                   help="wide CSV: first row time grid, then trajectories")
    p.add_argument("--responses", required=True, help="response column CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--diag")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--dim-prior", default="geom:0.15:5:12")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--tau2", type=float, default=1.0)
    p.add_argument("--noise-shape", type=float, default=1.0)
    p.add_argument("--noise-rate", type=float, default=1.0)
    p.add_argument("--sigma-min", type=float, default=0.0)
    p.set_defaults(handler=_cmd_funcreg)

    p = sub.add_parser("whitenoise", help="white-noise sequence model")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--diag")
    p.add_argument("--n", type=float, required=True, help="noise level (variance 1/n)")
    p.add_argument("--tau2", type=float, default=1.0)
    p.add_argument("--dim-prior", default="geom:0.5:1:8")
    p.set_defaults(handler=_cmd_whitenoise)

    p = sub.add_parser("repro-section9",
                       help="reproduce the built-in mixture-density benchmark")
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--curve-out", help="CSV of truth vs estimate, first replicate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--mc", type=int, default=_REPRO_DEFAULTS["n_draws"])
    p.add_argument("--grid", type=int, default=_REPRO_DEFAULTS["grid_size"])
    p.set_defaults(handler=_cmd_repro)

    p = sub.add_parser("verify", help="run the oracle cross-checks")
    p.set_defaults(handler=_cmd_verify)
    return parser


# ---------------------------------------------------------------------------
# I/O helpers


def _read_csv(path: str, n_cols: int) -> list[np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ConfigError(f"empty CSV file: {path}")
    header = lines[0].split(",")
    if _all_numeric(header):
        raise ConfigError(f"input CSV must carry a header row: {path}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != n_cols:
            raise ConfigError(
                f"{path}:{lineno}: expected {n_cols} columns, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric field") from None
    if not rows:
        raise ConfigError(f"no data rows in {path}")
    data = np.asarray(rows, dtype=float)
    return [data[:, i] for i in range(n_cols)]


def _all_numeric(fields) -> bool:
    try:
        [float(f) for f in fields]
    except ValueError:
        return False
    return True


def _read_wide_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise ConfigError(f"functional CSV needs a time row and trajectories: {path}")
    try:
        times = np.array([float(f) for f in lines[0].split(",")])
        rows = [np.array([float(f) for f in ln.split(",")]) for ln in lines[1:]]
    except ValueError:
        raise ConfigError(f"non-numeric field in {path}") from None
    if any(r.size != times.size for r in rows):
        raise ConfigError(f"ragged trajectory rows in {path}")
    return times, np.vstack(rows)


def _write_csv(path: str, header: list[str], columns: list[np.ndarray]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _write_json(path: str, payload: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _diag_path(args) -> str:
    return args.diag if args.diag else args.out + ".json"


def _method_from(args):
    if args.mc is not None:
        sampling = "uniform" if getattr(args, "uniform_sampling", False) else "weighted"
        return MonteCarlo(n_draws=args.mc, seed=args.seed, sampling=sampling)
    return Exact(budget=args.budget)


def _method_echo(args) -> dict:
    if args.mc is not None:
        return {"method": "mc", "n_draws": args.mc, "seed": args.seed}
    return {"method": "exact", "budget": args.budget}


def _grid(args) -> np.ndarray:
    if args.grid < 2:
        raise ConfigError("grid size must be at least 2")
    return np.linspace(0.0, 1.0, args.grid)


def _emit(args, est: PosteriorEstimate, header, columns, config_echo: dict,
          wall_time: float) -> int:
    _write_csv(args.out, header, columns)
    diagnostics = {
        "config": config_echo,
        "dimension_posterior": {str(j): p for j, p in est.dim_posterior.items()},
        "max_stderr": est.max_stderr,
        "method": est.method,
        "n_draws": est.n_draws,
        "seed": est.seed,
        "wall_time_s": wall_time,
    }
    diagnostics.update(est.diagnostics)
    _write_json(_diag_path(args), diagnostics)
    return 0


# ---------------------------------------------------------------------------
# estimation subcommands


def _cmd_density(args) -> int:
    start = time.perf_counter()
    (raw,) = _read_csv(args.data, 1)
    dim_prior = parse_dimension_prior(args.dim_prior)
    coef = parse_coefficient_prior(args.coef_prior)
    if not isinstance(coef, DirichletPrior):
        raise ConfigError("--coef-prior: density estimation needs a dirichlet prior")
    model = DensityModel(q=args.q, dim_prior=dim_prior, dirichlet=coef)
    grid = _grid(args)
    method = _method_from(args)
    if args.transform == "logistic":
        sample = transform_unbounded(raw, LOGISTIC)
        est = fit_density(sample.unit_data, model, grid, method)
    else:
        est = fit_density(raw, model, grid, method)
    echo = {
        "command": "density",
        "q": args.q,
        "dim_prior": dim_prior.spec_string(),
        "dim_prior_convention": dim_prior.convention,
        "coef_prior": coef.spec_string(),
        "grid": args.grid,
        "transform": args.transform,
        **_method_echo(args),
    }
    return _emit(args, est,
                 ["x", "mean", "stderr", "variance"],
                 [est.grid, est.mean, est.stderr, est.variance],
                 echo, time.perf_counter() - start)


def _cmd_spectral(args) -> int:
    start = time.perf_counter()
    (series,) = _read_csv(args.data, 1)
    dim_prior = parse_dimension_prior(args.dim_prior)
    coef = parse_coefficient_prior(args.coef_prior)
    if not isinstance(coef, GammaIndepPrior):
        raise ConfigError("--coef-prior: spectral estimation needs a gamma prior")
    model = SpectralModel(q=args.q, dim_prior=dim_prior, gamma=coef)
    pgram = periodogram(series)
    est = fit_inverse_spectral(pgram, model, _grid(args), _method_from(args))
    plugin = spectral_density_estimate(est)
    echo = {
        "command": "spectral",
        "q": args.q,
        "dim_prior": dim_prior.spec_string(),
        "coef_prior": coef.spec_string(),
        "grid": args.grid,
        **_method_echo(args),
    }
    return _emit(args, est,
                 ["omega", "inverse_mean", "stderr", "plugin_spectral_density"],
                 [est.grid, est.mean, est.stderr, plugin],
                 echo, time.perf_counter() - start)


def _cmd_binary(args) -> int:
    return _cmd_pair_regression(args, "binary")


def _cmd_poisson(args) -> int:
    return _cmd_pair_regression(args, "poisson")


def _cmd_pair_regression(args, kind: str) -> int:
    start = time.perf_counter()
    z, x = _read_csv(args.data, 2)
    dim_prior = parse_dimension_prior(args.dim_prior)
    coef = parse_coefficient_prior(args.coef_prior)
    if kind == "binary":
        if not isinstance(coef, BetaIndepPrior):
            raise ConfigError("--coef-prior: binary regression needs a beta prior")
        model = BinaryModel(q=args.q, dim_prior=dim_prior, beta=coef)
        est = fit_binary(z, x, model, _grid(args), _method_from(args))
    else:
        if not isinstance(coef, GammaIndepPrior):
            raise ConfigError("--coef-prior: poisson regression needs a gamma prior")
        model = PoissonModel(q=args.q, dim_prior=dim_prior, gamma=coef)
        est = fit_poisson(z, x, model, _grid(args), _method_from(args))
    echo = {
        "command": kind,
        "q": args.q,
        "dim_prior": dim_prior.spec_string(),
        "coef_prior": coef.spec_string(),
        "grid": args.grid,
        **_method_echo(args),
    }
    return _emit(args, est, ["z", "mean", "stderr"],
                 [est.grid, est.mean, est.stderr], echo,
                 time.perf_counter() - start)


def _cmd_linreg(args) -> int:
    start = time.perf_counter()
    z, x = _read_csv(args.data, 2)
    model = GaussRegressionModel(
        q=args.q, dim_prior=parse_dimension_prior(args.dim_prior),
        tau2=args.tau2, noise_shape=args.noise_shape, noise_rate=args.noise_rate,
        sigma_min=args.sigma_min)
    if args.grid < 2:
        raise ConfigError("grid size must be at least 2")
    est = fit_gauss_regression(model, z, x, np.linspace(0.0, 1.0, args.grid))
    echo = {
        "command": "linreg", "q": args.q,
        "dim_prior": model.dim_prior.spec_string(),
        "tau2": args.tau2, "noise_shape": args.noise_shape,
        "noise_rate": args.noise_rate, "sigma_min": args.sigma_min,
        "grid": args.grid, "method": "exact",
    }
    return _emit(args, est, ["z", "mean", "stderr"],
                 [est.grid, est.mean, est.stderr], echo,
                 time.perf_counter() - start)


def _cmd_funcreg(args) -> int:
    start = time.perf_counter()
    times, traj = _read_wide_csv(args.data)
    (responses,) = _read_csv(args.responses, 1)
    model = GaussRegressionModel(
        q=args.q, dim_prior=parse_dimension_prior(args.dim_prior),
        tau2=args.tau2, noise_shape=args.noise_shape, noise_rate=args.noise_rate,
        sigma_min=args.sigma_min)
    if args.grid < 2:
        raise ConfigError("grid size must be at least 2")
    est = fit_functional(FunctionalData(times, traj), responses, model,
                         np.linspace(0.0, 1.0, args.grid))
    echo = {
        "command": "funcreg", "q": args.q,
        "dim_prior": model.dim_prior.spec_string(),
        "tau2": args.tau2, "noise_shape": args.noise_shape,
        "noise_rate": args.noise_rate, "sigma_min": args.sigma_min,
        "grid": args.grid, "method": "exact",
    }
    return _emit(args, est, ["t", "mean", "stderr"],
                 [est.grid, est.mean, est.stderr], echo,
                 time.perf_counter() - start)


def _cmd_whitenoise(args) -> int:
    start = time.perf_counter()
    (x,) = _read_csv(args.data, 1)
    model = SequenceModel(observations=x, n=args.n, tau2=args.tau2,
                          dim_prior=parse_dimension_prior(args.dim_prior))
    fit = fit_whitenoise(model)
    _write_csv(args.out, ["index", "coefficient"],
               [np.arange(1, x.size + 1, dtype=float), fit.coef_mean])
    _write_json(_diag_path(args), {
        "config": {
            "command": "whitenoise", "n": args.n, "tau2": args.tau2,
            "dim_prior": model.dim_prior.spec_string(),
        },
        "dimension_posterior": {str(j): p for j, p in fit.dim_posterior.items()},
        "shrinkage": fit.shrinkage,
        "method": "exact",
        "wall_time_s": time.perf_counter() - start,
    })
    return 0


# ---------------------------------------------------------------------------
# benchmark reproduction


def _replicate_seeds(seed: int, index: int) -> tuple[np.random.Generator, int]:
    data_ss, mc_ss = np.random.SeedSequence([seed, index]).spawn(2)
    return np.random.default_rng(data_ss), int(mc_ss.generate_state(1)[0])


def repro_section9(seed: int = 0, replicates: int = 1, n_draws: int = 1000,
                   grid_size: int = 1000) -> dict:
    """Simulate the benchmark mixture, fit with the standard configuration,
    and report per-replicate mean squared error against the truth.

    The returned dict carries wall-clock time; everything else is a
    deterministic function of the seed.
    """
    if replicates < 1:
        raise ConfigError("replicates must be >= 1")
    cfg = dict(_REPRO_DEFAULTS, n_draws=n_draws, grid_size=grid_size, seed=seed)
    model = DensityModel(q=cfg["q"],
                         dim_prior=parse_dimension_prior(cfg["dim_prior"]),
                         dirichlet=DirichletPrior(1.0))
    grid = np.linspace(0.0, 1.0, grid_size)
    truth = expnorm_mixture_density(grid)

    def one(index: int) -> dict:
        t0 = time.perf_counter()
        data_rng, mc_seed = _replicate_seeds(seed, index)
        data = sample_expnorm_mixture(cfg["n"], data_rng)
        est = fit_density(data, model, grid,
                          MonteCarlo(n_draws=n_draws, seed=mc_seed),
                          with_variance=False)
        mse = float(np.mean((est.mean - truth) ** 2))
        return {
            "replicate": index,
            "mc_seed": mc_seed,
            "mse": mse,
            "max_stderr": est.max_stderr,
            "wall_time_s": time.perf_counter() - t0,
            "estimate": est,
        }

    results = list(_parallel_map(one, range(replicates)))
    report = {
        "config": cfg,
        "replicates": [
            {k: v for k, v in r.items() if k != "estimate"} for r in results
        ],
        "median_mse": float(np.median([r["mse"] for r in results])),
        "max_stderr": float(max(r["max_stderr"] for r in results)),
        "wall_time_s": float(sum(r["wall_time_s"] for r in results)),
        "_first_estimate": results[0]["estimate"],
        "_grid": grid,
        "_truth": truth,
    }
    return report


def _parallel_map(fn, items):
    items = list(items)
    workers = int(os.environ.get("RANDSERIES_THREADS", "1") or "1")
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _cmd_repro(args) -> int:
    report = repro_section9(seed=args.seed, replicates=args.replicates,
                            n_draws=args.mc, grid_size=args.grid)
    est = report.pop("_first_estimate")
    grid = report.pop("_grid")
    truth = report.pop("_truth")
    if args.curve_out:
        _write_csv(args.curve_out, ["x", "truth", "estimate"],
                   [grid, truth, est.mean])
    # wall-clock fields stay out of the written report so replays are
    # byte-identical; they are still printed below
    wall = report.pop("wall_time_s")
    persisted = dict(report)
    persisted["replicates"] = [
        {k: v for k, v in r.items() if k != "wall_time_s"}
        for r in report["replicates"]
    ]
    _write_json(args.out, persisted)
    print(f"median MSE {report['median_mse']:.4f}  "
          f"max stderr {report['max_stderr']:.4f}  wall time {wall:.1f}s")
    return 0


# ---------------------------------------------------------------------------
# verification


def _cmd_verify(_args) -> int:
    failures = 0
    for name, fn in _verification_checks():
        try:
            detail = fn()
            print(f"ok   {name}" + (f" ({detail})" if detail else ""))
        except AssertionError as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            print(f"FAIL {name}: {type(exc).__name__}: {exc}")
    return 0 if failures == 0 else 3


def _verification_checks():
    from . import splinebasis as sb
    from .density import build_density_spec
    from .regression import build_binary_spec, build_poisson_spec
    from .spectral import build_spectral_spec

    def check_integrals():
        for q, k in ((1, 6), (2, 7), (3, 5), (4, 3), (3, 1)):
            basis = sb.make_basis(q, k)
            closed = sb.basis_integrals(basis)
            for i in range(basis.J):
                quad = oracle.quad_integrate(
                    lambda t, i=i: sb.dense_matrix(basis, [t])[0, i],
                    0.0, 1.0, tol=1e-11, breakpoints=basis.knots)
                assert abs(quad - closed[i]) < 1e-10, (q, k, i)
        return "closed-form vs quadrature, 5 bases"

    def check_eval():
        rng = np.random.default_rng(8)
        for q, k in ((2, 4), (3, 5), (4, 6)):
            basis = sb.make_basis(q, k)
            for x in np.append(rng.random(12), [0.0, 1.0]):
                ref = oracle.naive_basis_row(basis, float(x))
                assert np.max(np.abs(sb.dense_matrix(basis, [x])[0] - ref)) < 1e-12
        return "sparse evaluation vs naive recursion"

    def check_density_collapse():
        prior = DimensionPrior("geometric", (0.5,), 4, 4)
        model = DensityModel(q=1, dim_prior=prior)
        spec = build_density_spec(model, [0.30])
        for x, want in ((0.31, 4.0 * 2.0 / 5.0), (0.90, 4.0 / 5.0)):
            got = exact_ratio(spec, x).value
            assert abs(got - want) < 1e-10, (x, got, want)
        return "Dirichlet-multinomial histogram"

    def check_spectral_collapse():
        prior = DimensionPrior("geometric", (0.5,), 1, 1)
        model = SpectralModel(q=1, dim_prior=prior,
                              gamma=GammaIndepPrior(2.0, 3.0))
        pgram = periodogram([0.8, -0.8])
        u = float(pgram.ordinates[0])
        spec = build_spectral_spec(model, pgram)
        got = exact_ratio(spec, 0.37).value
        assert abs(got - 3.0 / (3.0 + u)) < 1e-10
        return "Gamma-exponential"

    def check_binary_collapse():
        prior = DimensionPrior("geometric", (0.5,), 1, 1)
        model = BinaryModel(q=1, dim_prior=prior, beta=BetaIndepPrior(1.0, 1.0))
        spec = build_binary_spec(model, [0.2, 0.5, 0.9], [1, 1, 0])
        got = exact_ratio(spec, 0.4).value
        assert abs(got - 3.0 / 5.0) < 1e-10
        return "Beta-binomial"

    def check_poisson_collapse():
        prior = DimensionPrior("geometric", (0.5,), 1, 1)
        model = PoissonModel(q=1, dim_prior=prior, gamma=GammaIndepPrior(1.0, 1.0))
        spec = build_poisson_spec(model, [0.2, 0.6], [2, 1])
        got = exact_ratio(spec, 0.4).value
        assert abs(got - 4.0 / 3.0) < 1e-10
        return "Gamma-Poisson"

    def check_whitenoise():
        prior = DimensionPrior("geometric", (0.5,), 3, 3)
        fit = fit_whitenoise(SequenceModel(np.array([2.0, -1.0, 0.5]),
                                           n=1.0, tau2=1.0, dim_prior=prior))
        assert np.max(np.abs(fit.coef_mean - np.array([1.0, -0.5, 0.25]))) < 1e-12
        return "half shrinkage at n=tau2=1"

    def check_periodogram():
        rng = np.random.default_rng(5)
        series = rng.normal(size=48)
        got = periodogram(series).ordinates
        ref = oracle.reference_periodogram(series)
        assert np.max(np.abs(got - ref)) < 1e-10
        return "vectorized vs double loop"

    def check_brute():
        prior = DimensionPrior("geometric", (0.5,), 2, 2)
        model = DensityModel(q=1, dim_prior=prior)
        spec = build_density_spec(model, [0.7])
        got = exact_ratio(spec, 0.7).value
        # q=1, j=2: the density at 0.7 is theta_2 scaled by the bin height 2
        want = oracle.brute_posterior(
            "density", q=1, j=2, data=[0.7], prior=DirichletPrior(1.0),
            g=lambda th: 2.0 * th[:, 1])
        assert abs(got - want) < 2e-3 * abs(want), (got, want)
        return "density exact vs quadrature"

    def check_prior_mean():
        prior = DimensionPrior("geometric", (0.3,), 2, 5)
        model = DensityModel(q=1, dim_prior=prior)
        spec = build_density_spec(model, [])
        from .engine import dimension_posterior
        post = dimension_posterior(spec)
        table = prior.pmf_table()
        assert max(abs(post[j] - table[i]) for i, j in enumerate(prior.support)) < 1e-12
        return "no data leaves the dimension prior unchanged"

    return [
        ("basis integrals", check_integrals),
        ("basis evaluation", check_eval),
        ("density conjugacy collapse", check_density_collapse),
        ("spectral conjugacy collapse", check_spectral_collapse),
        ("binary conjugacy collapse", check_binary_collapse),
        ("poisson conjugacy collapse", check_poisson_collapse),
        ("white-noise shrinkage", check_whitenoise),
        ("periodogram reference", check_periodogram),
        ("brute-force oracle", check_brute),
        ("dimension posterior without data", check_prior_mean),
    ]


if __name__ == "__main__":
    main()
