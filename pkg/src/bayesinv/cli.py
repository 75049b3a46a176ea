"""Command-line front door: demo problems, GP fits, calibration, and the
posterior non-contraction experiment, all emitting CSV/JSON artifacts.

Every run writes a manifest.json recording the merged configuration, the
seed, and the package version; identical manifests reproduce byte-identical
CSV outputs. Flag values override config-file values, which override the
built-in defaults. See FORMATS.md for the CSV column contracts.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import fd_priors, forward_ops, gp_rkhs, inverse_regression, linear_posterior
from . import spline as spline_mod

FORWARD_KERNELS = ("deblur", "seismic", "gravity", "diffraction", "groundwater")
PRIOR_NAMES = ("smooth-interior", "smooth-zero", "smooth-soft", "nonsmooth")
GP_KERNELS = ("ou", "sqexp", "brownian", "spline")
TRUTHS = ("smooth", "step")

DEFAULTS = {
    "demo-linear": {
        "kernel": "deblur",
        "prior": "smooth-zero",
        "truth": "smooth",
        "n": 100,
        "sigma": 0.01,
        "tilde_sigma": 0.01,
        "psi": 0.05,
        "height": 1.0,
        "diffusion": 0.5,
        "velocity": 1.0,
        "x_obs": 1.0,
        "t_max": 1.0,
    },
    "gp": {
        "kernel": "ou",
        "b": 1.0,
        "variance": 1.0,
        "n": 20,
        "sigma": 0.1,
        "data": None,
        "num_pred": 201,
    },
    "calibrate": {
        "data": None,
        "ynew": None,
        "n": 30,
        "m": 1,
        "alpha_true": 0.0,
        "beta_true": 2.0,
        "sigma_true": 1.0,
        "x_true": 1.0,
        "level": 0.05,
        "curve_points": 2001,
    },
    "inconsistency": {
        "theta": 1.0,
        "n_values": "100,1000,10000,100000",
        "curve_points": 512,
    },
}


@dataclass
class ExperimentConfig:
    command: str
    seed: int
    output_dir: Path
    params: dict = field(default_factory=dict)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(cfg: ExperimentConfig) -> None:
    _write_json(
        cfg.output_dir / "manifest.json",
        {
            "command": cfg.command,
            "seed": cfg.seed,
            "package_version": __version__,
            "params": cfg.params,
        },
    )


def _truth_function(name: str, grid: forward_ops.Grid) -> np.ndarray:
    u = (grid.nodes - grid.a) / (grid.b - grid.a)
    if name == "smooth":
        return np.sin(2.0 * math.pi * u)
    return np.where(u < 0.5, 0.2, 1.0)


def _build_operator(cfg: ExperimentConfig):
    p = cfg.params
    name = p["kernel"]
    n = int(p["n"])
    if name == "deblur":
        grid = forward_ops.Grid(0.0, 1.0, n)
        return forward_ops.make_gaussian_blur(grid, p["psi"])
    if name == "seismic":
        grid = forward_ops.Grid(0.0, 1.0, n)
        return forward_ops.make_travel_time(grid)
    if name == "gravity":
        grid = forward_ops.Grid(-5.0, 5.0, n)
        return forward_ops.make_gravity(grid, p["height"])
    if name == "diffraction":
        grid = forward_ops.Grid(-math.pi / 2.0, math.pi / 2.0, n)
        return forward_ops.make_diffraction(grid)
    grid = forward_ops.Grid(0.0, p["t_max"], n)
    return forward_ops.make_groundwater(grid, p["diffusion"], p["velocity"], p["x_obs"], p["t_max"])


def _build_prior(name: str, n: int, tilde_sigma: float) -> fd_priors.PrecisionRoot:
    builders = {
        "smooth-interior": fd_priors.build_smooth_interior,
        "smooth-zero": fd_priors.build_smooth_zero_boundary,
        "smooth-soft": fd_priors.build_smooth_soft_boundary,
        "nonsmooth": fd_priors.build_nonsmooth,
    }
    return builders[name](n, tilde_sigma)


def cmd_demo_linear(cfg: ExperimentConfig) -> None:
    p = cfg.params
    op = _build_operator(cfg)
    prior = _build_prior(p["prior"], op.col_grid.n, p["tilde_sigma"])
    truth = _truth_function(p["truth"], op.col_grid)
    y = forward_ops.simulate_data(op, truth, p["sigma"], cfg.seed)
    post = linear_posterior.fit(op, prior, y, p["sigma"])
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_manifest(cfg)
    xs = op.col_grid.nodes
    _write_csv(cfg.output_dir / "truth.csv", ["x", "theta_true"],
               [(float(a), float(b)) for a, b in zip(xs, truth)])
    _write_csv(cfg.output_dir / "data.csv", ["x", "y"],
               [(float(a), float(b)) for a, b in zip(op.row_grid.nodes, y)])
    linear_posterior.export_posterior_bands(post, str(cfg.output_dir / "posterior.csv"))
    rmse_map = float(np.sqrt(np.mean((post.mean - truth) ** 2)))
    rmse_data = float(np.sqrt(np.mean((y - truth) ** 2)))
    _write_json(
        cfg.output_dir / "summary.json",
        {
            "rmse_map": rmse_map,
            "rmse_data": rmse_data,
            "objective_at_map": linear_posterior.tikhonov_objective(post, post.mean, y),
        },
    )


def _gp_kernel(p: dict) -> gp_rkhs.CovarianceKernel:
    name = p["kernel"]
    if name == "ou":
        return gp_rkhs.ou_kernel(p["b"])
    if name == "sqexp":
        return gp_rkhs.squared_exponential_kernel(p["b"])
    if name == "brownian":
        return gp_rkhs.brownian_motion_kernel()
    return gp_rkhs.spline_cubic_kernel(p["variance"])


def cmd_gp(cfg: ExperimentConfig) -> None:
    p = cfg.params
    kernel = _gp_kernel(p)
    if p["data"] is not None:
        xs, ys = _read_xy_csv(Path(p["data"]))
    else:
        rng = np.random.default_rng(cfg.seed)
        xs = np.sort(rng.uniform(0.02, 0.98, int(p["n"])))
        ys = np.sin(2.0 * math.pi * xs) + p["sigma"] * rng.standard_normal(xs.size)
    fit = gp_rkhs.gp_fit(xs, ys, kernel, p["sigma"])
    # representer identity: the predictive mean against an explicit sum
    resid = 0.0
    for xv in xs:
        mean, _ = gp_rkhs.gp_predict(fit, float(xv))
        explicit = float(sum(c * kernel.evaluate(float(xv), xt) for c, xt in zip(fit.coefficients, xs)))
        resid = max(resid, abs(mean - explicit))
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_manifest(cfg)
    grid = np.linspace(0.0, 1.0, int(p["num_pred"]))
    gp_rkhs.export_gp_curve(fit, grid, str(cfg.output_dir / "curve.csv"))
    _write_csv(cfg.output_dir / "data.csv", ["x", "y"],
               [(float(a), float(b)) for a, b in zip(xs, ys)])
    _write_json(
        cfg.output_dir / "summary.json",
        {
            "representer_residual_max": resid,
            "condition_estimate": fit.condition_estimate,
            "ill_conditioned": bool(fit.ill_conditioned),
        },
    )


def _read_xy_csv(path: Path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header[:2]] != ["x", "y"]:
            raise ValueError(f"{path}: expected header columns 'x,y'")
        rows = [(float(r[0]), float(r[1])) for r in reader]
    xs = np.array([r[0] for r in rows])
    ys = np.array([r[1] for r in rows])
    return xs, ys


def cmd_calibrate(cfg: ExperimentConfig) -> None:
    p = cfg.params
    if p["data"] is not None:
        xs, ys = _read_xy_csv(Path(p["data"]))
        if p["ynew"] is None:
            raise ValueError("--ynew is required when --data is given")
        y_new = np.array([float(v) for v in str(p["ynew"]).split(",")])
        data = inverse_regression.make_calibration_data(xs, ys, y_new)
    else:
        data = inverse_regression.simulate_calibration(
            int(p["n"]), int(p["m"]), p["alpha_true"], p["beta_true"],
            p["sigma_true"], p["x_true"], cfg.seed,
        )
    est = inverse_regression.fit_calibration(data)
    payload = {
        "n": data.n,
        "m": data.m,
        "alpha_hat": est.alpha_hat,
        "beta_hat": est.beta_hat,
        "gamma_hat": est.gamma_hat,
        "delta_hat": est.delta_hat,
        "x_classical": est.x_classical,
        "x_inverse": est.x_inverse,
        "sigma2_1": est.sigma2_1,
        "sigma2_2": est.sigma2_2,
        "sigma2_pooled": est.sigma2_pooled,
        "f_stat": est.f_stat if math.isfinite(est.f_stat) else "inf",
    }
    if data.m == 1:
        cset = inverse_regression.confidence_set(est, data.n, p["level"])
        payload["confidence_set"] = {
            "kind": cset.kind,
            "lower": cset.lower,
            "upper": cset.upper,
            "alpha": cset.alpha,
            "uninformative": cset.uninformative,
        }
    else:
        payload["confidence_set"] = None
        payload["confidence_set_note"] = "the set inversion applies to m = 1 only"
    posterior = None
    if math.isfinite(est.f_stat) and data.n >= 4:
        prior = inverse_regression.hoadley_informative_prior(data.n)
        posterior = inverse_regression.hoadley_posterior(data, prior)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_manifest(cfg)
    if posterior is not None:
        lo, hi = posterior.window
        grid = np.linspace(lo, hi, int(p["curve_points"]))
        dens = posterior.pdf(grid)
        _write_csv(cfg.output_dir / "posterior.csv", ["x", "density"],
                   [(float(a), float(b)) for a, b in zip(grid, dens)])
        payload["posterior_integral"] = float(np.trapezoid(dens, grid))
        payload["posterior_mean"] = posterior.mean()
    else:
        payload["posterior_integral"] = None
        payload["posterior_note"] = "degenerate fit: posterior curve not written"
    _write_json(cfg.output_dir / "estimates.json", payload)


def cmd_inconsistency(cfg: ExperimentConfig) -> None:
    p = cfg.params
    n_values = [int(v) for v in str(p["n_values"]).split(",")]
    rows = inverse_regression.inconsistency_experiment(p["theta"], n_values, cfg.seed)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_manifest(cfg)
    _write_csv(
        cfg.output_dir / "table.csv",
        ["n", "posterior_sd", "x_true"],
        [(row.n, row.posterior_sd, row.x_true) for row in rows],
    )
    for row in rows:
        lo = max(row.posterior.window[0], 1e-9)
        hi = row.posterior.exact_mean + 6.0 * row.posterior_sd
        grid = np.linspace(lo, hi, int(p["curve_points"]))
        dens = row.posterior.pdf(grid)
        _write_csv(
            cfg.output_dir / f"density_n{row.n}.csv",
            ["x", "density", "x_true"],
            [(float(a), float(b), row.x_true) for a, b in zip(grid, dens)],
        )
    _write_json(
        cfg.output_dir / "summary.json",
        {"sd_ratio_last_over_first": rows[-1].posterior_sd / rows[0].posterior_sd},
    )


HANDLERS = {
    "demo-linear": cmd_demo_linear,
    "gp": cmd_gp,
    "calibrate": cmd_calibrate,
    "inconsistency": cmd_inconsistency,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayesinv",
        description="Synthetic-data demos and Monte Carlo experiments for "
        "Bayesian inverse problems and inverse regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--config", type=str, default=None)

    sp = sub.add_parser("demo-linear", help="simulate, fit, and export a linear inverse problem")
    common(sp)
    sp.add_argument("--kernel", choices=FORWARD_KERNELS, default=None)
    sp.add_argument("--prior", choices=PRIOR_NAMES, default=None)
    sp.add_argument("--truth", choices=TRUTHS, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--sigma", type=float, default=None)
    sp.add_argument("--tilde-sigma", dest="tilde_sigma", type=float, default=None)
    sp.add_argument("--psi", type=float, default=None)
    sp.add_argument("--height", type=float, default=None)
    sp.add_argument("--diffusion", type=float, default=None)
    sp.add_argument("--velocity", type=float, default=None)
    sp.add_argument("--x-obs", dest="x_obs", type=float, default=None)
    sp.add_argument("--t-max", dest="t_max", type=float, default=None)

    sp = sub.add_parser("gp", help="Gaussian-process regression on supplied or simulated data")
    common(sp)
    sp.add_argument("--kernel", choices=GP_KERNELS, default=None)
    sp.add_argument("--b", type=float, default=None)
    sp.add_argument("--variance", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--sigma", type=float, default=None)
    sp.add_argument("--data", type=str, default=None)
    sp.add_argument("--num-pred", dest="num_pred", type=int, default=None)

    sp = sub.add_parser("calibrate", help="inverse linear regression estimates and posteriors")
    common(sp)
    sp.add_argument("--data", type=str, default=None)
    sp.add_argument("--ynew", type=str, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--alpha-true", dest="alpha_true", type=float, default=None)
    sp.add_argument("--beta-true", dest="beta_true", type=float, default=None)
    sp.add_argument("--sigma-true", dest="sigma_true", type=float, default=None)
    sp.add_argument("--x-true", dest="x_true", type=float, default=None)
    sp.add_argument("--level", type=float, default=None)
    sp.add_argument("--curve-points", dest="curve_points", type=int, default=None)

    sp = sub.add_parser("inconsistency", help="posterior non-contraction table and curves")
    common(sp)
    sp.add_argument("--theta", type=float, default=None)
    sp.add_argument("--n-values", dest="n_values", type=str, default=None)
    sp.add_argument("--curve-points", dest="curve_points", type=int, default=None)

    return parser


def _merge_config(args: argparse.Namespace) -> ExperimentConfig:
    command = args.command
    params = dict(DEFAULTS[command])
    seed = 0
    out = None
    if args.config is not None:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        seed = int(file_cfg.pop("seed", seed))
        out = file_cfg.pop("out", out)
        unknown = set(file_cfg) - set(params)
        if unknown:
            raise ValueError(f"unknown config keys for '{command}': {sorted(unknown)}")
        params.update(file_cfg)
    for key in params:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            params[key] = cli_val
    if args.seed is not None:
        seed = args.seed
    if args.out is not None:
        out = args.out
    if out is None:
        out = f"runs/{command}"
    return ExperimentConfig(command, seed, Path(out), params)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        HANDLERS[cfg.command](cfg)
    except FileNotFoundError as exc:
        print(f"bayesinv: cannot read input file: {exc}", file=sys.stderr)
        return 1
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"bayesinv: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
