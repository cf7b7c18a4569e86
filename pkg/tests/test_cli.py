"""End-to-end tests of the command-line interface via main()."""

import hashlib
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from amocboot import (
    AmocSpec,
    Ar1Params,
    BootstrapConfig,
    LimitLawConfig,
    TimeSeries,
    ar1_generate,
    bootstrap_distribution,
    bootstrap_quantiles,
    empirical_quantile,
    fit_amoc,
    make_amoc_series,
    read_series,
    simulate_argmax_samples,
    write_series,
)
from amocboot.cli import main
from amocboot.rngstreams import derive_seed


SMALL_LIMIT_FLAGS = [
    "--limit-half-width", "50", "--limit-step", "0.5", "--limit-replicates", "1000",
]


def write_step_series(path, n=80, m=40, d=2.0):
    x = np.zeros(n)
    x[m:] += d
    write_series(path, x)
    return path


def write_ar1_series(path, n=120, m=60, d=1.5, rho=0.2, seed=500):
    rng = np.random.default_rng(seed)
    e = ar1_generate(Ar1Params(rho=rho), n, rng)
    series = make_amoc_series(AmocSpec(n=n, m=m, d=d), e)
    write_series(path, series.values)
    return path


def study_yaml(path, **overrides):
    base = {
        "n": 40,
        "m": 20,
        "d_values": [2],
        "rho_values": [0.1],
        "gamma_values": [0.5],
        "block_lengths": [4],
        "replications_R": 2,
        "resamples_B": 50,
        "alpha_grid": [0.05, 0.1],
        "master_seed": 3,
    }
    base.update(overrides)
    lines = []
    for key, value in base.items():
        lines.append(f"{key}: {value}")
    lines.append("limit_law: {half_width_T: 50, step_h: 0.5, replicates_M: 1000}")
    path.write_text("\n".join(lines) + "\n")
    return path


class TestAnalyze:
    def test_noiseless_step(self, tmp_path, capsys):
        series = write_step_series(tmp_path / "x.txt")
        out_json = tmp_path / "report.json"
        code = main(
            ["analyze", str(series), "-K", "8", "-B", "200", "--alpha", "0.1",
             "--json", str(out_json), *SMALL_LIMIT_FLAGS]
        )
        assert code == 0
        text = capsys.readouterr().out
        assert "m_hat=40" in text
        report = json.loads(out_json.read_text())
        assert report["n"] == 80
        assert report["m_hat"] == 40
        assert report["theta_hat"] == 0.5
        assert report["d_hat"] == 2.0
        assert report["mu1_hat"] == 0.0
        assert report["mu2_hat"] == 2.0
        assert report["tau2_floored"] is True
        assert any("floored" in w for w in report["warnings"])
        boot = report["bootstrap_results"][0]["intervals"][0]
        assert (boot["lower"], boot["upper"]) == (40.0, 40.0)
        asy = report["asymptotic_results"]["intervals"][0]
        assert abs(asy["lower"] - 40.0) < 1e-6
        assert abs(asy["upper"] - 40.0) < 1e-6

    def test_json_reproduces_library_quantities_exactly(self, tmp_path):
        series_path = write_ar1_series(tmp_path / "x.txt")
        out_json = tmp_path / "report.json"
        code = main(
            ["analyze", str(series_path), "-K", "6", "12", "-B", "400",
             "--alpha", "0.05", "0.1", "--seed", "42", "--gamma", "0.5",
             "--json", str(out_json), *SMALL_LIMIT_FLAGS]
        )
        assert code == 0
        report = json.loads(out_json.read_text())

        series = read_series(series_path)
        fit = fit_amoc(series, 0.5)
        assert report["m_hat"] == fit.m_hat
        assert report["d_hat"] == fit.d_hat
        assert report["theta_hat"] == fit.m_hat / series.n

        # bootstrap blocks: seeds are derived from (seed, tag 1, block index)
        # and every reported number retraces the library computation exactly
        for k_idx, block in enumerate(report["bootstrap_results"]):
            expected_seed = derive_seed(42, 1, k_idx)
            assert block["seed"] == expected_seed
            dist = bootstrap_distribution(
                fit,
                BootstrapConfig(
                    block_length=block["block_length"], resamples=400, seed=expected_seed
                ),
            )
            for entry in block["intervals"]:
                q_lo, q_hi = bootstrap_quantiles(dist.samples, entry["alpha"])
                assert entry["q_lower"] == q_lo
                assert entry["q_upper"] == q_hi
                assert entry["lower"] == 2.0 * fit.m_hat - q_hi
                assert entry["upper"] == 2.0 * fit.m_hat - q_lo

        # asymptotic intervals reflect the reported quantiles around m_hat
        assert report["limit_settings"]["seed"] == derive_seed(42, 2)
        asy = report["asymptotic_results"]
        c = report["tau2"] / (report["d_hat"] * report["d_hat"])
        for entry in asy["intervals"]:
            assert entry["lower"] == report["m_hat"] - c * entry["q_upper"]
            assert entry["upper"] == report["m_hat"] - c * entry["q_lower"]
            assert entry["lower_clipped"] == min(max(entry["lower"], 1.0), 80.0)

    def test_interval_clipping_respects_series_bounds(self, tmp_path):
        series_path = write_ar1_series(tmp_path / "x.txt", n=60, m=30, d=0.3, seed=9)
        out_json = tmp_path / "r.json"
        code = main(
            ["analyze", str(series_path), "-K", "6", "-B", "300",
             "--alpha", "0.01", "--json", str(out_json), *SMALL_LIMIT_FLAGS]
        )
        assert code == 0
        report = json.loads(out_json.read_text())
        for block in report["bootstrap_results"]:
            for entry in block["intervals"]:
                assert 1.0 <= entry["lower_clipped"] <= entry["upper_clipped"] <= 60.0

    def test_missing_series_file_is_data_error(self, tmp_path, capsys):
        code = main(["analyze", str(tmp_path / "absent.txt"), "-K", "4"])
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_malformed_series_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("1.0\ntwo\n3.0\n4.0\n")
        code = main(["analyze", str(bad), "-K", "4"])
        assert code == 2
        err = capsys.readouterr().err
        assert ":2:" in err and "not a number" in err

    def test_bad_gamma_is_usage_error(self, tmp_path, capsys):
        series = write_step_series(tmp_path / "x.txt")
        code = main(["analyze", str(series), "-K", "4", "--gamma", "0.9"])
        assert code == 1
        assert "--gamma" in capsys.readouterr().err

    def test_block_length_beyond_n_is_usage_error(self, tmp_path):
        series = write_step_series(tmp_path / "x.txt", n=20, m=10)
        assert main(["analyze", str(series), "-K", "21", "-B", "50"]) == 1

    def test_bad_alpha_is_usage_error(self, tmp_path):
        series = write_step_series(tmp_path / "x.txt")
        assert main(["analyze", str(series), "-K", "4", "--alpha", "1.5"]) == 1

    def test_bad_window_is_usage_error(self, tmp_path):
        series = write_step_series(tmp_path / "x.txt")
        assert main(["analyze", str(series), "-K", "4", "--window", "79"]) == 1

    def test_literal_sampler_grid_guard_exits_3(self, tmp_path, capsys):
        # change very close to the edge pushes the argmax scale far beyond
        # a small literal grid
        series = write_step_series(tmp_path / "x.txt", n=100, m=2, d=1.0)
        code = main(
            ["analyze", str(series), "-K", "5", "-B", "50", "--gamma", "0.0",
             "--limit-sampler", "literal", "--limit-half-width", "10",
             "--limit-step", "0.1", "--limit-replicates", "1000"]
        )
        assert code == 3
        assert "numerical guard" in capsys.readouterr().err

    def test_auto_sampler_handles_edge_change(self, tmp_path):
        # same edge change as above; rescaling keeps the normalized argmax
        # well inside a full-width grid where the literal sampler needs a
        # grid orders of magnitude wider
        series = write_step_series(tmp_path / "x.txt", n=100, m=2, d=1.0)
        code = main(
            ["analyze", str(series), "-K", "5", "-B", "50", "--gamma", "0.0",
             "--limit-half-width", "200", "--limit-step", "2",
             "--limit-replicates", "1000"]
        )
        assert code == 0

    def test_missing_required_flag_exits_1(self, tmp_path):
        series = write_step_series(tmp_path / "x.txt")
        with pytest.raises(SystemExit) as err:
            main(["analyze", str(series)])
        assert err.value.code == 1

    def test_unknown_flag_exits_1(self, tmp_path):
        series = write_step_series(tmp_path / "x.txt")
        with pytest.raises(SystemExit) as err:
            main(["analyze", str(series), "-K", "4", "--bogus"])
        assert err.value.code == 1


class TestStudyCommand:
    def test_smoke_outputs_and_manifest(self, tmp_path, capsys):
        cfg = study_yaml(tmp_path / "study.yaml")
        out = tmp_path / "out"
        assert main(["study", str(cfg), str(out)]) == 0
        assert "wrote" in capsys.readouterr().out
        for name in ("cole.csv", "coil.csv", "replications.csv", "manifest.json"):
            assert (out / name).exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config_sha256"] == hashlib.sha256(cfg.read_bytes()).hexdigest()
        assert manifest["master_seed"] == 3
        assert manifest["resolved_config"]["n"] == 40
        assert manifest["package_version"]
        assert manifest["kernel_backend"] in ("compiled", "python")
        assert manifest["outputs"] == ["coil.csv", "cole.csv", "replications.csv"]
        assert manifest["undefined_asymptotic"]["total"] >= 0

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = study_yaml(tmp_path / "study.yaml")
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["study", str(cfg), str(out1)]) == 0
        assert main(["study", str(cfg), str(out2)]) == 0
        for name in ("cole.csv", "coil.csv", "replications.csv", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_threads_do_not_change_output(self, tmp_path):
        cfg = study_yaml(tmp_path / "study.yaml", replications_R=3)
        out1, out2 = tmp_path / "t1", tmp_path / "t2"
        assert main(["study", str(cfg), str(out1)]) == 0
        assert main(["study", str(cfg), str(out2), "--threads", "3"]) == 0
        for name in ("cole.csv", "coil.csv", "replications.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_config_problems_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "study.yaml"
        bad.write_text("n: 40\nbogus: 1\n")
        assert main(["study", str(bad), str(tmp_path / "out")]) == 1
        err = capsys.readouterr().err
        assert "bogus: unknown key" in err and "m: required key missing" in err

    def test_missing_config_exits_1(self, tmp_path):
        assert main(["study", str(tmp_path / "none.yaml"), str(tmp_path / "out")]) == 1

    def test_bad_thread_count_exits_1(self, tmp_path):
        cfg = study_yaml(tmp_path / "study.yaml")
        assert main(["study", str(cfg), str(tmp_path / "out"), "--threads", "0"]) == 1


class TestLimitQuantilesCommand:
    ARGS = [
        "limit-quantiles", "--theta", "0.5", "--gamma", "0.5",
        "--half-width", "50", "--step", "0.5", "--replicates", "2000",
        "--seed", "7", "--p", "0.05", "0.5", "0.95",
    ]

    def test_csv_output_matches_library(self, tmp_path):
        out = tmp_path / "q.csv"
        assert main([*self.ARGS, "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "p,q"
        rows = [line.split(",") for line in lines[1:]]
        assert [float(r[0]) for r in rows] == [0.05, 0.5, 0.95]
        q = [float(r[1]) for r in rows]
        assert q[0] < q[1] < q[2]

        samples = simulate_argmax_samples(
            LimitLawConfig(
                theta=0.5, gamma=0.5, half_width_T=50.0, step_h=0.5,
                replicates_M=2000, seed=7,
            )
        )
        expected = [empirical_quantile(samples.samples, p) for p in (0.05, 0.5, 0.95)]
        assert q == expected

    def test_stdout_and_determinism(self, capsys):
        assert main(self.ARGS) == 0
        first = capsys.readouterr().out
        assert main(self.ARGS) == 0
        second = capsys.readouterr().out
        assert first == second
        assert first.startswith("p,q\n")

    def test_grid_guard_exits_3(self, capsys):
        code = main(
            ["limit-quantiles", "--theta", "0.01", "--gamma", "0.0",
             "--half-width", "10", "--step", "0.1", "--replicates", "1000"]
        )
        assert code == 3
        assert "numerical guard" in capsys.readouterr().err

    def test_bad_probability_exits_1(self):
        assert main(
            ["limit-quantiles", "--theta", "0.5", "--gamma", "0.5", "--p", "1.5"]
        ) == 1

    def test_bad_theta_exits_1(self):
        assert main(
            ["limit-quantiles", "--theta", "1.5", "--gamma", "0.5",
             "--replicates", "1000"]
        ) == 1


class TestEntryPoints:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "amocboot", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "amocboot" in proc.stdout

    def test_console_script(self):
        exe = shutil.which("amocboot")
        assert exe is not None, "console script not on PATH"
        proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
        assert proc.returncode == 0

    def test_no_subcommand_exits_1(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 1
