import json
import math
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bayesinv import cli
from bayesinv import gp_rkhs as gr
from bayesinv import spline as sp


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def run_cli(args):
    return cli.main(args)


class TestDemoLinear:
    def test_deblur_denoises(self, tmp_path):
        out = tmp_path / "run"
        code = run_cli([
            "demo-linear", "--kernel", "deblur", "--prior", "smooth-zero",
            "--truth", "smooth", "--n", "100", "--sigma", "0.01",
            "--seed", "0", "--out", str(out),
        ])
        assert code == 0
        for name in ("manifest.json", "truth.csv", "data.csv", "posterior.csv", "summary.json"):
            assert (out / name).exists()
        summary = read_json(out / "summary.json")
        assert summary["rmse_map"] < summary["rmse_data"]

    def test_seed_determinism_byte_identical(self, tmp_path):
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            run_cli(["demo-linear", "--kernel", "seismic", "--prior", "nonsmooth",
                     "--truth", "step", "--n", "60", "--seed", "9", "--out", str(out)])
            outs.append(out)
        for name in ("truth.csv", "data.csv", "posterior.csv", "manifest.json", "summary.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_invalid_prior_name_writes_nothing(self, tmp_path):
        out = tmp_path / "bad"
        with pytest.raises(SystemExit) as exc:
            run_cli(["demo-linear", "--prior", "banana", "--out", str(out)])
        assert exc.value.code == 2
        assert not out.exists()

    @pytest.mark.parametrize("kernel", ["gravity", "diffraction", "groundwater"])
    def test_other_kernels_run(self, tmp_path, kernel):
        out = tmp_path / kernel
        code = run_cli(["demo-linear", "--kernel", kernel, "--prior", "smooth-soft",
                        "--n", "40", "--out", str(out)])
        assert code == 0
        assert (out / "posterior.csv").exists()


class TestGP:
    def test_representer_residual_reported(self, tmp_path):
        out = tmp_path / "gp"
        code = run_cli(["gp", "--kernel", "ou", "--n", "20", "--seed", "1", "--out", str(out)])
        assert code == 0
        summary = read_json(out / "summary.json")
        assert summary["representer_residual_max"] < 1e-12
        lines = (out / "curve.csv").read_text().strip().splitlines()
        assert lines[0] == "x,mean,sd"

    def test_spline_kernel_gp_matches_spline_module(self):
        # cross-module consistency: GP regression with the scaled spline
        # kernel equals the spline fit with the polynomial part disabled
        rng = np.random.default_rng(4)
        x = np.sort(rng.uniform(0.05, 0.95, 12))
        y = np.sin(2 * math.pi * x) + 0.2 * rng.standard_normal(12)
        sigma2, sigma2_theta = 0.04, 1.5
        fit_gp = gr.gp_fit(x, y, gr.spline_cubic_kernel(sigma2_theta), math.sqrt(sigma2))
        fit_sp = sp.spline_fit(x, y, sigma2, sigma2_theta)
        smat = sigma2_theta * sp.spline_kernel(x[:, None], x[None, :])
        beta_off = smat @ np.linalg.solve(fit_sp.khat, y)
        gp_at_knots = np.array([gr.gp_predict(fit_gp, float(v))[0] for v in x])
        assert np.abs(gp_at_knots - beta_off).max() < 1e-8

    def test_missing_data_file(self, tmp_path, capsys):
        code = run_cli(["gp", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "cannot read input file" in capsys.readouterr().err

    def test_data_file_roundtrip(self, tmp_path):
        data = tmp_path / "obs.csv"
        rng = np.random.default_rng(0)
        xs = np.sort(rng.uniform(0, 1, 15))
        ys = np.cos(2 * math.pi * xs)
        data.write_text("x,y\n" + "\n".join(f"{float(a)!r},{float(b)!r}" for a, b in zip(xs, ys)))
        out = tmp_path / "fit"
        assert run_cli(["gp", "--kernel", "sqexp", "--b", "0.2", "--sigma", "0.05",
                        "--data", str(data), "--out", str(out)]) == 0
        assert (out / "summary.json").exists()


class TestCalibrate:
    def test_perfectly_linear_dataset(self, tmp_path):
        data = tmp_path / "line.csv"
        data.write_text("x,y\n-1.0,0.0\n0.0,1.0\n1.0,2.0\n")
        out = tmp_path / "cal"
        code = run_cli(["calibrate", "--data", str(data), "--ynew", "2.0", "--out", str(out)])
        assert code == 0
        est = read_json(out / "estimates.json")
        assert_allclose(est["x_classical"], est["x_inverse"])
        assert est["f_stat"] == "inf"
        assert est["posterior_integral"] is None
        assert est["confidence_set"]["kind"] == "interval"

    def test_simulated_posterior_integrates_to_one(self, tmp_path):
        out = tmp_path / "cal"
        code = run_cli(["calibrate", "--n", "15", "--m", "1", "--beta-true", "2.0",
                        "--sigma-true", "1.0", "--x-true", "0.7", "--seed", "0",
                        "--out", str(out)])
        assert code == 0
        est = read_json(out / "estimates.json")
        assert abs(est["posterior_integral"] - 1.0) < 1e-6
        assert abs(est["posterior_mean"] - est["x_inverse"]) < 1e-5
        lines = (out / "posterior.csv").read_text().strip().splitlines()
        assert lines[0] == "x,density"

    def test_uninformative_set_flagged(self, tmp_path):
        out = tmp_path / "flat"
        code = run_cli(["calibrate", "--n", "15", "--beta-true", "0.01",
                        "--sigma-true", "5.0", "--seed", "3", "--out", str(out)])
        assert code == 0
        est = read_json(out / "estimates.json")
        assert est["confidence_set"]["kind"] == "whole_line"
        assert est["confidence_set"]["uninformative"] is True

    def test_multiple_new_responses_skip_confidence_set(self, tmp_path):
        out = tmp_path / "multi"
        code = run_cli(["calibrate", "--n", "12", "--m", "3", "--beta-true", "2.0",
                        "--x-true", "0.4", "--seed", "1", "--out", str(out)])
        assert code == 0
        est = read_json(out / "estimates.json")
        assert est["confidence_set"] is None
        assert est["sigma2_2"] is not None

    def test_ynew_required_with_data_file(self, tmp_path, capsys):
        data = tmp_path / "line.csv"
        data.write_text("x,y\n-1.0,0.0\n0.0,1.0\n1.0,2.0\n")
        code = run_cli(["calibrate", "--data", str(data), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "ynew" in capsys.readouterr().err


class TestInconsistency:
    def test_table_and_densities(self, tmp_path):
        out = tmp_path / "inc"
        start = time.time()
        code = run_cli(["inconsistency", "--theta", "1.0",
                        "--n-values", "100,1000,10000,100000",
                        "--seed", "0", "--out", str(out)])
        elapsed = time.time() - start
        assert code == 0
        assert elapsed < 60.0
        rows = (out / "table.csv").read_text().strip().splitlines()
        assert rows[0] == "n,posterior_sd,x_true"
        table = [row.split(",") for row in rows[1:]]
        sds = {int(r[0]): float(r[1]) for r in table}
        assert sds[100000] >= 0.5 * sds[100]
        for n in (100, 1000, 10000, 100000):
            lines = (out / f"density_n{n}.csv").read_text().strip().splitlines()
            assert lines[0] == "x,density,x_true"
            vals = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
            assert np.all(np.diff(vals[:, 0]) > 0)
            assert np.all(vals[:, 1] >= 0.0)

    def test_manifest_records_merged_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"theta": 2.0, "n_values": "100,1000", "curve_points": 64}))
        out = tmp_path / "inc"
        code = run_cli(["inconsistency", "--config", str(cfg), "--theta", "3.0",
                        "--seed", "4", "--out", str(out)])
        assert code == 0
        manifest = read_json(out / "manifest.json")
        assert manifest["params"]["theta"] == 3.0  # flag wins over config file
        assert manifest["params"]["n_values"] == "100,1000"  # config wins over default
        assert manifest["seed"] == 4
        assert manifest["command"] == "inconsistency"

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        code = run_cli(["inconsistency", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "unknown config keys" in capsys.readouterr().err
