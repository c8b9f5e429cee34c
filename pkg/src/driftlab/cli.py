"""Command-line interface.

Subcommands: simulate, fit, filter, collocate, diagnose, accept.  Options can
come from a config file (one section per subcommand, see config.py) with
command-line flags taking precedence.  Outputs are written atomically.
Exit codes: 0 success, 2 validation error, 3 non-convergence (result file is
still written).
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import acceptance
from .adequacy import envelope_check, synthetic_replicates
from .collocation import BasisConfig, CollocationOptions, PenaltySpec, collocation_fit
from .config import OPTIONS, load_config, merge_options
from .errors import ConfigError, DriftlabError
from .estimating import EstimatingFunction, ee_solve, raw_moment_psi
from .likelihood import BridgeDensity, GbmDensity, OuDensity, mle_fit
from .ioutil import atomic_write_text
from .models import GbmParams, OuParams, TvGrowthParams, gbm_beta_spec, gbm_spec, ou_spec
from .movement import gaussian_position_model, preset_integrated_rw_t
from .observe import (
    ObservationModel,
    read_noisy_csv,
    read_observations_csv,
)
from .particle import particle_filter
from .paths import Path, TimeGrid, format_float, write_path_csv
from .simulate import simulate_gbm_exact, simulate_ou, simulate_tv_growth


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftlab",
                                     description="SDE simulation and inference toolkit")
    sub = parser.add_subparsers(dest="command")
    for command, table in OPTIONS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", type=str, default=None,
                       help="config file with a [%s] section" % command)
        for key, (typ, help_text) in table.items():
            argtype = str if typ is not float and typ is not int else typ
            p.add_argument(f"--{key}", type=argtype, default=None, help=help_text,
                           dest=key.replace("-", "_"))
    return parser


def _require(opts: dict, *keys):
    missing = [k for k in keys if k not in opts]
    if missing:
        raise ConfigError(f"missing required options: {', '.join(missing)}")


def _existing_file(path: str) -> str:
    if not os.path.exists(path):
        raise ConfigError(f"input file does not exist: {path}")
    return path


def _write_csv(path: str, writer, payload) -> None:
    buf = io.StringIO()
    writer(payload, buf)
    atomic_write_text(path, buf.getvalue())


def _json_text(d: dict) -> str:
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def _cmd_simulate(opts: dict) -> int:
    _require(opts, "model", "t-end", "steps", "out")
    grid = TimeGrid(opts.get("t-start", 0.0), opts["t-end"], opts["steps"])
    seed = opts.get("seed", 0)
    model = opts["model"]
    if model == "gbm":
        p = GbmParams(beta=opts.get("beta", 0.0), sigma=opts.get("sigma", 0.0),
                      x0=opts.get("x0", 1.0))
        path = simulate_gbm_exact(p, grid, seed)
    elif model == "ou":
        p = OuParams(gamma=opts.get("gamma", 1.0), beta_bar=opts.get("beta-bar", 0.0),
                     sigma=opts.get("sigma", 0.0), b0=opts.get("b0", 0.0))
        path = simulate_ou(p, grid, seed)
    elif model == "tv_growth":
        p = TvGrowthParams(gamma=opts.get("gamma", 1.0), beta_bar=opts.get("beta-bar", 0.0),
                           sigma=opts.get("sigma", 0.0), b0=opts.get("b0", 0.0),
                           x0=opts.get("x0", 1.0))
        beta_path, x_path = simulate_tv_growth(p.ou, p.x0, grid, seed)
        path = Path(times=x_path.times,
                    values=np.column_stack([x_path.values[:, 0], beta_path.values[:, 0]]))
    else:
        raise ConfigError(f"unknown model {model!r} for simulate")
    _write_csv(opts["out"], write_path_csv, path)
    return 0


def _gbm_init_from_data(obs) -> tuple:
    values = np.asarray(obs.values, dtype=float).reshape(len(obs), -1)[:, 0]
    dts = np.diff(obs.times)
    r = np.diff(np.log(values))
    sigma0 = float(np.std(r / np.sqrt(dts), ddof=1)) or 0.1
    beta0 = float(np.mean(r / dts) + 0.5 * sigma0**2)
    return beta0, sigma0


def _ou_init_from_data(obs) -> tuple:
    values = np.asarray(obs.values, dtype=float).reshape(len(obs), -1)[:, 0]
    dts = np.diff(obs.times)
    mean_dt = float(np.mean(dts))
    centered = values - values.mean()
    denom = float(np.sum(centered**2))
    ac = float(np.sum(centered[:-1] * centered[1:]) / denom) if denom > 0 else 0.5
    gamma0 = -np.log(min(max(ac, 0.01), 0.99)) / mean_dt
    sigma0 = float(np.std(np.diff(values), ddof=1) / np.sqrt(mean_dt)) or 0.1
    return float(gamma0), float(values.mean()), sigma0


def _cmd_fit(opts: dict) -> int:
    _require(opts, "method", "model", "data", "out")
    seed = opts.get("seed", 0)
    with open(_existing_file(opts["data"]), "r", encoding="utf-8") as fh:
        obs = read_observations_csv(fh)
    method = opts["method"]
    model = opts["model"]

    if method == "mle":
        if model == "gbm":
            beta0, sigma0 = _gbm_init_from_data(obs)
            beta0 = opts.get("beta", beta0)
            sigma0 = opts.get("sigma", sigma0)
            free = ("beta",) if opts.get("fix-sigma") else ("beta", "sigma")
            td = GbmDensity(GbmParams(beta=beta0, sigma=max(sigma0, 1e-8)), free=free)
        elif model == "ou":
            gamma0, bbar0, sigma0 = _ou_init_from_data(obs)
            td = OuDensity(OuParams(gamma=opts.get("gamma", gamma0),
                                    beta_bar=opts.get("beta-bar", bbar0),
                                    sigma=max(opts.get("sigma", sigma0), 1e-8)))
        else:
            raise ConfigError(f"mle supports models gbm and ou, not {model!r}")
        fit = mle_fit(td, obs, td.theta, seed=seed)
    elif method == "ee":
        if model != "gbm":
            raise ConfigError("ee fitting is implemented for the gbm model")
        _require(opts, "sigma")
        beta0, _ = _gbm_init_from_data(obs)
        beta0 = opts.get("beta", beta0)
        ef = EstimatingFunction(psi=raw_moment_psi((1,)), J=opts.get("j", 8))
        fit = ee_solve(gbm_beta_spec(beta0, opts["sigma"]), ef, obs,
                       np.array([beta0]), seed=seed)
    elif method == "bridge-mle":
        if model != "gbm":
            raise ConfigError("bridge-mle fitting is implemented for the gbm model")
        beta0, sigma0 = _gbm_init_from_data(obs)
        beta0 = opts.get("beta", beta0)
        sigma0 = max(opts.get("sigma", sigma0), 1e-8)
        spec = gbm_spec(GbmParams(beta=beta0, sigma=sigma0))
        td = BridgeDensity(spec, m_sub=opts.get("m-sub", 8),
                           j_samples=opts.get("j-samples", 200), seed=seed)
        fit = mle_fit(td, obs, td.theta, seed=seed, compute_stderr=False)
    else:
        raise ConfigError(f"unknown fit method {method!r}")

    atomic_write_text(opts["out"], fit.to_json())
    return 0 if fit.converged else 3


def _observation_model(opts: dict, default_scale=None) -> ObservationModel:
    kind = opts.get("obs-kind", "gaussian")
    scale = opts.get("obs-scale", default_scale)
    if scale is None:
        raise ConfigError("obs-scale is required")
    return ObservationModel(kind=kind, scale=scale, dof=opts.get("obs-dof"))


def _cmd_filter(opts: dict) -> int:
    _require(opts, "model", "data", "out")
    seed = opts.get("seed", 0)
    with open(_existing_file(opts["data"]), "r", encoding="utf-8") as fh:
        obs = read_noisy_csv(fh)
    model_id = opts["model"]
    if model_id == "ou":
        spec = ou_spec(OuParams(gamma=opts.get("gamma", 1.0),
                                beta_bar=opts.get("beta-bar", 0.0),
                                sigma=opts.get("sigma", 1.0),
                                b0=opts.get("b0", 0.0)))
        om = _observation_model(opts)
    elif model_id == "gbm":
        spec = gbm_spec(GbmParams(beta=opts.get("beta", 0.0),
                                  sigma=opts.get("sigma", 0.0),
                                  x0=opts.get("x0", 1.0)))
        om = _observation_model(opts)
    elif model_id == "irw":
        _require(opts, "step-sd", "t-scale", "t-dof")
        n_coords = obs.y2d().shape[1]
        spec, om = preset_integrated_rw_t(opts["step-sd"], opts["t-scale"],
                                          opts["t-dof"], n_coords=n_coords)
        if opts.get("obs-kind") == "gaussian":
            om = gaussian_position_model(opts.get("obs-scale", opts["t-scale"]),
                                         n_coords=n_coords)
    else:
        raise ConfigError(f"unknown model {model_id!r} for filter")
    result = particle_filter(spec, om, obs, n_particles=opts.get("particles", 1000),
                             substeps=opts.get("substeps", 5), seed=seed)
    atomic_write_text(opts["out"], result.to_json())
    return 0


def _cmd_collocate(opts: dict) -> int:
    _require(opts, "data", "out", "lambda", "obs-scale")
    with open(_existing_file(opts["data"]), "r", encoding="utf-8") as fh:
        obs = read_noisy_csv(fh)
    if opts.get("model", "gbm") != "gbm":
        raise ConfigError("collocate currently supports the gbm drift model")
    # theta for the fit is the drift rate only; sigma stays fixed
    spec = gbm_beta_spec(opts.get("beta", 0.1), opts.get("sigma", 1.0))
    om = ObservationModel(kind="gaussian", scale=opts["obs-scale"])
    basis = BasisConfig.from_times(obs.times)
    pen = PenaltySpec(lam=opts["lambda"], weight_mode=opts.get("weight-mode", "unweighted"))
    fit, fitted = collocation_fit(
        obs, om, spec, basis, pen,
        opts=CollocationOptions(max_outer=opts.get("max-outer", 200)))
    payload = fit.to_json_dict()
    payload.update({
        "lambda": fit.diagnostics["lambda"],
        "weight_mode": fit.diagnostics["weight_mode"],
        "data_term": fit.diagnostics["data_term"],
        "penalty_term": fit.diagnostics["penalty_term"],
    })
    atomic_write_text(opts["out"], _json_text(payload))
    if "traj-out" in opts:
        lines = ["t,x_fit,dxdt_fit"]
        for t, (x, dx) in zip(fitted.times, fitted.values):
            lines.append(",".join(format_float(v) for v in (t, x, dx)))
        atomic_write_text(opts["traj-out"], "\n".join(lines) + "\n")
    return 0 if fit.converged else 3


def _cmd_diagnose(opts: dict) -> int:
    _require(opts, "data", "out", "model")
    seed = opts.get("seed", 0)
    k = opts.get("k", 50)
    noisy = "obs-scale" in opts
    with open(_existing_file(opts["data"]), "r", encoding="utf-8") as fh:
        observed = read_noisy_csv(fh) if noisy else read_observations_csv(fh)
    model_id = opts["model"]
    if model_id == "gbm":
        model = GbmParams(beta=opts.get("beta", 0.0), sigma=opts.get("sigma", 0.0),
                          x0=opts.get("x0", 1.0))
    elif model_id == "ou":
        model = OuParams(gamma=opts.get("gamma", 1.0), beta_bar=opts.get("beta-bar", 0.0),
                         sigma=opts.get("sigma", 0.0), b0=opts.get("b0", 0.0))
    elif model_id == "tv_growth":
        model = TvGrowthParams(gamma=opts.get("gamma", 1.0),
                               beta_bar=opts.get("beta-bar", 0.0),
                               sigma=opts.get("sigma", 0.0), b0=opts.get("b0", 0.0),
                               x0=opts.get("x0", 1.0))
    else:
        raise ConfigError(f"unknown model {model_id!r} for diagnose")
    om = _observation_model(opts) if noisy else None
    synthetic = synthetic_replicates(model, observed.times, k, seed, om=om)
    report = envelope_check(observed, synthetic)
    atomic_write_text(opts["out"], report.to_json())
    return 0


def _cmd_accept(opts: dict) -> int:
    out_dir = opts.get("out-dir", "acceptance_out")
    os.makedirs(out_dir, exist_ok=True)
    selected = None
    if "criteria" in opts:
        selected = {int(v) for v in opts["criteria"].split(",")}
    results = acceptance.run_all(selected)
    all_ok = True
    for res in results:
        all_ok &= res.passed
        print(acceptance.format_result(res))
        atomic_write_text(os.path.join(out_dir, f"{res.name}.json"),
                          _json_text(res.to_json_dict()))
    summary = {"all_passed": bool(all_ok), "criteria": [r.name for r in results]}
    atomic_write_text(os.path.join(out_dir, "summary.json"), _json_text(summary))
    return 0 if all_ok else 1


_DISPATCH = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "filter": _cmd_filter,
    "collocate": _cmd_collocate,
    "diagnose": _cmd_diagnose,
    "accept": _cmd_accept,
}


def cli_run(argv) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 2
    flag_options = {
        key: getattr(ns, key.replace("-", "_"))
        for key in OPTIONS[ns.command]
    }
    try:
        file_options = {}
        if ns.config is not None:
            file_options = load_config(_existing_file(ns.config)).get(ns.command, {})
        cfg = merge_options(ns.command, file_options, flag_options)
        return _DISPATCH[ns.command](cfg.typed())
    except (ConfigError, DriftlabError, ValueError, OSError) as exc:
        print(f"driftlab {ns.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_run(sys.argv[1:]))
