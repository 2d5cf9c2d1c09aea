"""End-to-end tests of the command-line interface."""

import json

import numpy as np
import pytest

from randseries.cli import repro_section9, run


def write_column(path, values, header="x"):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")


def write_pairs(path, zs, xs):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("z,x\n")
        for z, x in zip(zs, xs):
            fh.write(f"{float(z)!r},{float(x)!r}\n")


@pytest.fixture
def sample_csv(tmp_path):
    rng = np.random.default_rng(42)
    path = tmp_path / "sample.csv"
    write_column(path, rng.random(15))
    return str(path)


class TestDensityCommand:
    def test_runs_and_writes_outputs(self, tmp_path, sample_csv):
        out = tmp_path / "est.csv"
        code = run(["density", "--q", "3", "--dim-prior", "geom:0.15:5:12",
                    "--coef-prior", "dirichlet:1.0", "--mc", "500", "--seed", "7",
                    "--grid", "40", "--data", sample_csv, "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,mean,stderr,variance"
        assert len(lines) == 41
        diag = json.loads((tmp_path / "est.csv.json").read_text())
        assert diag["seed"] == 7
        assert diag["config"]["dim_prior"] == "geom:0.15:5:12"
        assert 0.0 < diag["max_stderr"] < 1.0
        assert abs(sum(map(float, diag["dimension_posterior"].values())) - 1.0) < 1e-9

    def test_replay_is_byte_identical(self, tmp_path, sample_csv):
        args = ["density", "--mc", "400", "--seed", "3", "--grid", "25",
                "--data", sample_csv]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(args + ["--out", str(out1)]) == 0
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_mc_one_is_config_error(self, tmp_path, sample_csv):
        assert run(["density", "--mc", "1", "--data", sample_csv,
                    "--out", str(tmp_path / "x.csv")]) == 2

    def test_missing_file_is_config_error(self, tmp_path):
        assert run(["density", "--data", str(tmp_path / "nope.csv"),
                    "--out", str(tmp_path / "x.csv")]) == 2

    def test_headerless_csv_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("0.5\n0.7\n")
        assert run(["density", "--data", str(bad),
                    "--out", str(tmp_path / "x.csv")]) == 2

    def test_wrong_prior_family_is_config_error(self, tmp_path, sample_csv):
        assert run(["density", "--coef-prior", "gamma:1:1", "--data", sample_csv,
                    "--out", str(tmp_path / "x.csv")]) == 2

    def test_bad_prior_spec_is_config_error(self, tmp_path, sample_csv):
        assert run(["density", "--dim-prior", "geom:0.15:5", "--data", sample_csv,
                    "--out", str(tmp_path / "x.csv")]) == 2

    def test_exact_budget_blowup_is_config_error(self, tmp_path, sample_csv):
        # 15 observations with q=3 over j in [5,12] exceed a tiny budget
        assert run(["density", "--budget", "1000", "--data", sample_csv,
                    "--out", str(tmp_path / "x.csv")]) == 2

    def test_logistic_transform(self, tmp_path):
        data = tmp_path / "real.csv"
        write_column(data, np.random.default_rng(0).normal(size=12), header="y")
        assert run(["density", "--transform", "logistic", "--mc", "300",
                    "--dim-prior", "geom:0.3:3:6", "--data", str(data),
                    "--out", str(tmp_path / "r.csv")]) == 0


class TestOtherCommands:
    def test_spectral(self, tmp_path):
        data = tmp_path / "series.csv"
        write_column(data, np.random.default_rng(1).normal(size=64), header="value")
        out = tmp_path / "spec.csv"
        code = run(["spectral", "--dim-prior", "geom:0.3:3:6", "--mc", "400",
                    "--grid", "16", "--data", str(data), "--out", str(out)])
        assert code == 0
        assert out.read_text().splitlines()[0] == \
            "omega,inverse_mean,stderr,plugin_spectral_density"

    def test_binary(self, tmp_path):
        data = tmp_path / "pairs.csv"
        rng = np.random.default_rng(2)
        write_pairs(data, rng.random(8), rng.integers(0, 2, size=8))
        assert run(["binary", "--dim-prior", "geom:0.3:2:4", "--q", "2",
                    "--grid", "11", "--data", str(data),
                    "--out", str(tmp_path / "b.csv")]) == 0

    def test_poisson(self, tmp_path):
        data = tmp_path / "pairs.csv"
        rng = np.random.default_rng(3)
        write_pairs(data, rng.random(6), rng.poisson(2.0, size=6))
        assert run(["poisson", "--dim-prior", "geom:0.3:2:4", "--q", "2",
                    "--grid", "11", "--data", str(data),
                    "--out", str(tmp_path / "p.csv")]) == 0

    def test_linreg(self, tmp_path):
        data = tmp_path / "pairs.csv"
        rng = np.random.default_rng(4)
        z = rng.random(20)
        write_pairs(data, z, np.sin(2 * np.pi * z) + 0.1 * rng.normal(size=20))
        assert run(["linreg", "--dim-prior", "geom:0.3:3:6", "--grid", "11",
                    "--data", str(data), "--out", str(tmp_path / "l.csv")]) == 0

    def test_funcreg(self, tmp_path):
        rng = np.random.default_rng(5)
        times = np.linspace(0, 1, 120)
        traj = rng.normal(size=(10, 120))
        wide = tmp_path / "traj.csv"
        with open(wide, "w", encoding="utf-8") as fh:
            fh.write(",".join(repr(float(t)) for t in times) + "\n")
            for row in traj:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        resp = tmp_path / "resp.csv"
        write_column(resp, rng.normal(size=10), header="response")
        assert run(["funcreg", "--dim-prior", "geom:0.3:2:4", "--q", "2",
                    "--grid", "11", "--data", str(wide),
                    "--responses", str(resp),
                    "--out", str(tmp_path / "f.csv")]) == 0

    def test_whitenoise(self, tmp_path):
        data = tmp_path / "seq.csv"
        write_column(data, [2.0, 0.5, 0.1, 0.05], header="value")
        out = tmp_path / "w.csv"
        code = run(["whitenoise", "--n", "4", "--tau2", "1.0",
                    "--dim-prior", "geom:0.5:1:4", "--data", str(data),
                    "--out", str(out)])
        assert code == 0
        diag = json.loads((tmp_path / "w.csv.json").read_text())
        assert "shrinkage" in diag

    def test_verify(self):
        assert run(["verify"]) == 0

    def test_unknown_subcommand(self):
        assert run(["mystery"]) == 2


class TestRepro:
    def test_report_is_deterministic(self, tmp_path):
        args = ["repro-section9", "--seed", "5", "--replicates", "1",
                "--mc", "200", "--grid", "50"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(args + ["--out", str(a)]) == 0
        assert run(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_curve_output_and_fields(self, tmp_path):
        out = tmp_path / "rep.json"
        curve = tmp_path / "curve.csv"
        assert run(["repro-section9", "--seed", "1", "--replicates", "2",
                    "--mc", "200", "--grid", "50", "--out", str(out),
                    "--curve-out", str(curve)]) == 0
        report = json.loads(out.read_text())
        assert len(report["replicates"]) == 2
        assert report["median_mse"] > 0.0
        assert curve.read_text().splitlines()[0] == "x,truth,estimate"

    def test_function_returns_wall_time(self):
        report = repro_section9(seed=2, replicates=1, n_draws=150, grid_size=40)
        assert report["wall_time_s"] > 0.0
        assert report["replicates"][0]["mse"] >= 0.0
