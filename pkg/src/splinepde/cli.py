"""Command-line front end.

    splinepde simulate    --pde transport --M 100 --N 100 --sigma 0.1 --out runs/sim
    splinepde identify    --input runs/sim/noisy_0.1.csv --true-support u_x --out runs/id
    splinepde diagnose    --input runs/sim/noisy_0.1.csv --true-support u_x --out runs/diag
    splinepde montecarlo  --pde viscous_burgers --sigma 0.01,1 --replicates 50 --out runs/mc
    splinepde benchmark   --method spline --axis N --sizes 200,400,800 --out runs/bench
    splinepde forecast    --input table.csv --train-steps 12 --out runs/fc

Every option may also come from ``--config FILE``: one ``key = value`` per
line, ``#`` starts a comment, keys are the long option names with dashes or
underscores. Command-line flags override the file. Each run writes
``manifest.cfg`` in the same format, which reproduces the run when passed
back with ``--config``.

Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import IdentifyConfig, benchmark, identify, monte_carlo, replicate_seeds
from .forecast import euler_forecast, model_terms, score_forecast
from .io import DataError, ingest_csv, synthetic_monthly_table, write_field_csv, write_table_csv
from .lasso import diagnose_conditions, export_path_csv, lambda_theory
from .simulate import NoiseSpec, PdeSpec, add_noise, simulate_field
from .types import Grid1D, TermLabel

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(s):
    return [float(v) for v in str(s).replace(";", ",").split(",") if v.strip()]


def _ints(s):
    return [int(v) for v in str(s).replace(";", ",").split(",") if v.strip()]


def _labels(s):
    return [TermLabel.parse(v) for v in str(s).replace(";", ",").split(",") if v.strip()]


def _opt_float(s):
    return None if str(s).lower() in ("", "none") else float(s)


# key -> (type, default); shared by every subcommand that uses the key
OPTIONS = {
    "pde": (str, "transport"),
    "input": (str, None),
    "out": (str, "splinepde_out"),
    "M": (int, 100),
    "N": (int, 100),
    "sigma": (_floats, [0.0]),
    "seed": (int, 0),
    "replicates": (int, 50),
    "a": (float, -2.0),
    "nu": (float, 0.1),
    "p_max": (int, 2),
    "q_max": (int, 2),
    "alpha_x": (_opt_float, None),
    "alpha_t": (_opt_float, None),
    "smoothing_scale": (_opt_float, None),
    "n_lambdas": (int, 100),
    "lambda_ratio": (float, 1e-4),
    "lam": (_opt_float, None),
    "tol": (float, 1e-8),
    "max_terms": (int, 3),
    "max_sweeps": (int, 1000),
    "true_support": (_labels, None),
    "criterion": (str, "path"),
    "single_ratio": (float, 0.1),
    "workers": (int, 1),
    "method": (str, "spline"),
    "axis": (str, "N"),
    "sizes": (_ints, [200, 400, 800, 1600]),
    "fixed": (int, 20),
    "train_steps": (int, None),
    "forecast_alpha_x": (_opt_float, None),
    "synthetic": (str, "no"),
}

COMMAND_KEYS = {
    "simulate": ["pde", "M", "N", "sigma", "seed", "a", "nu", "out"],
    "identify": ["input", "p_max", "q_max", "alpha_x", "alpha_t", "smoothing_scale", "n_lambdas",
                 "lambda_ratio", "lam", "tol", "max_sweeps", "max_terms", "true_support", "out"],
    "diagnose": ["input", "p_max", "q_max", "alpha_x", "alpha_t", "smoothing_scale", "n_lambdas",
                 "lambda_ratio", "tol", "max_sweeps", "true_support", "out"],
    "montecarlo": ["pde", "M", "N", "sigma", "replicates", "seed", "a", "nu", "p_max", "q_max",
                   "alpha_x", "alpha_t", "smoothing_scale", "n_lambdas", "lambda_ratio", "tol",
                   "max_sweeps", "criterion", "single_ratio", "workers", "out"],
    "benchmark": ["method", "axis", "sizes", "fixed", "out"],
    "forecast": ["input", "synthetic", "seed", "train_steps", "p_max", "q_max", "alpha_x",
                 "alpha_t", "smoothing_scale", "n_lambdas", "lambda_ratio", "tol", "max_sweeps",
                 "max_terms", "true_support", "forecast_alpha_x", "out"],
}


def read_config(path) -> dict:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    for k, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{k}: expected 'key = value'")
        key = key.strip().replace("-", "_")
        if key == "lambda":
            key = "lam"
        out[key] = value.strip()
    return out


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return ",".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_manifest(path, command: str, cfg: dict, extra: dict | None = None) -> None:
    lines = [f"# splinepde {__version__} manifest", f"# command = {command}"]
    for k in COMMAND_KEYS[command]:
        lines.append(f"{k} = {_format(cfg[k])}")
    for k, v in (extra or {}).items():
        lines.append(f"# {k} = {_format(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def resolve(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < command-line flags."""
    raw = read_config(args.config) if args.config else {}
    cfg = {}
    for key in COMMAND_KEYS[command]:
        typ, default = OPTIONS[key]
        flag = getattr(args, key, None)
        if flag is not None:
            value = flag
        elif key in raw:
            value = raw.pop(key)
        else:
            cfg[key] = default
            continue
        try:
            cfg[key] = typ(value)
        except (TypeError, ValueError) as e:
            raise UsageError(f"bad value for {key}: {value!r} ({e})") from None
    unknown = set(raw) - set(OPTIONS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return cfg


def _pde(cfg) -> PdeSpec:
    try:
        return PdeSpec(cfg["pde"], a=cfg.get("a", -2.0), nu=cfg.get("nu", 0.1))
    except ValueError as e:
        raise UsageError(str(e)) from None


def _identify_config(cfg) -> IdentifyConfig:
    return IdentifyConfig(p_max=cfg["p_max"], q_max=cfg["q_max"], alpha_x=cfg["alpha_x"],
                          alpha_t=cfg["alpha_t"], smoothing_scale=cfg["smoothing_scale"],
                          n_lambdas=cfg["n_lambdas"], lambda_ratio=cfg["lambda_ratio"],
                          tol=cfg["tol"], max_sweeps=cfg["max_sweeps"], lam=cfg.get("lam"),
                          max_terms=cfg.get("max_terms", 3))


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _input_field(cfg):
    if not cfg.get("input"):
        raise UsageError("--input is required")
    try:
        return ingest_csv(cfg["input"])
    except FileNotFoundError:
        raise DataError(f"input file not found: {cfg['input']}") from None


def cmd_simulate(cfg) -> int:
    """Write clean and noisy benchmark fields as CSV."""
    spec = _pde(cfg)
    if cfg["M"] < 4 or cfg["N"] < 4:
        raise UsageError("M and N must be at least 4")
    if any(s < 0 for s in cfg["sigma"]):
        raise UsageError("sigma values must be nonnegative")
    out = _outdir(cfg)
    clean = simulate_field(spec, spec.grid(cfg["M"], cfg["N"]))
    write_field_csv(clean, out / "clean.csv")
    seeds = replicate_seeds(cfg["seed"], len(cfg["sigma"]))
    files = []
    for sigma, s in zip(cfg["sigma"], seeds):
        name = f"noisy_{sigma!r}.csv"
        write_field_csv(add_noise(clean, NoiseSpec(sigma, s)), out / name)
        files.append(name)
    write_manifest(out / "manifest.cfg", "simulate", cfg,
                   {"noise_seeds": seeds, "files": ["clean.csv"] + files})
    return EXIT_OK


def _identify_common(cfg):
    field = _input_field(cfg)
    icfg = _identify_config(cfg)
    res = identify(field, icfg, cfg["true_support"])
    return field, res


def _conditions(res, support):
    d = res.dictionary
    if not support or len(support) >= d.K:
        return None
    report = diagnose_conditions(d, support)
    out = report.to_dict()
    if report.invertible and report.incoherence is not None and report.incoherence < 1:
        mu = 1.0 - report.incoherence
        out["lambda_theory_advisory"] = lambda_theory(d.K, res.estimates.grid.N, mu)
        out["lambda_theory_note"] = "constant C = 1 and r = 0.1 are arbitrary; advisory only"
    out["support"] = [str(d.labels[j]) for j in support]
    return out


def cmd_identify(cfg) -> int:
    """Estimate derivatives, run the lasso path and report the model."""
    field, res = _identify_common(cfg)
    out = _outdir(cfg)
    export_path_csv(res.path, res.dictionary.labels, out / "path.csv")
    report = {
        "grid": {"M": field.grid.M, "N": field.grid.N},
        "alpha_x": res.alpha_x,
        "alpha_t": res.alpha_t,
        "noise_level": res.extra["noise_level"],
        "labels": [str(l) for l in res.dictionary.labels],
        "degenerate_columns": [str(l) for l, z in zip(res.dictionary.labels,
                                                       res.dictionary.degenerate) if z],
        "chosen": None if res.chosen is None else res.chosen.to_dict(),
        "path_supports": sorted({",".join(m.support_labels) for m in res.path}),
        "converged_all": all(m.converged for m in res.path),
    }
    if cfg["true_support"] is not None:
        report["true_support"] = [str(l) for l in cfg["true_support"]]
        report["exact_support_recovered"] = bool(res.recovered)
    _dump(out / "model.json", report)
    support = (res.dictionary.indices_of(cfg["true_support"]) if cfg["true_support"]
               else (list(res.chosen.support) if res.chosen else []))
    _dump(out / "conditions.json", _conditions(res, support))
    write_manifest(out / "manifest.cfg", "identify", cfg)
    return EXIT_OK


def cmd_diagnose(cfg) -> int:
    """Report invertibility, incoherence and minimal eigenvalue for a support."""
    _, res = _identify_common(cfg)
    out = _outdir(cfg)
    support = (res.dictionary.indices_of(cfg["true_support"]) if cfg["true_support"]
               else (list(res.chosen.support) if res.chosen else []))
    if not support:
        raise DataError("no support to diagnose: declare --true-support or supply identifiable data")
    report = _conditions(res, support)
    if report is None:
        raise UsageError("support must be a proper subset of the dictionary")
    _dump(out / "conditions.json", report)
    print(json.dumps(report, indent=2, sort_keys=True))
    write_manifest(out / "manifest.cfg", "diagnose", cfg)
    return EXIT_OK


def cmd_montecarlo(cfg) -> int:
    """Success fraction of exact support recovery over noisy replicates."""
    if cfg["replicates"] < 1:
        raise UsageError("replicates must be at least 1")
    if cfg["criterion"] not in ("path", "single"):
        raise UsageError("criterion must be 'path' or 'single'")
    if any(s < 0 for s in cfg["sigma"]):
        raise UsageError("sigma values must be nonnegative")
    spec = _pde(cfg)
    res = monte_carlo(spec, cfg["M"], cfg["N"], cfg["sigma"], cfg["replicates"], cfg["seed"],
                      _identify_config(cfg), cfg["criterion"], cfg["single_ratio"], cfg["workers"])
    out = _outdir(cfg)
    with open(out / "accuracy.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pde"] + [f"sigma={s!r}" for s in res])
        w.writerow([spec.kind] + [repr(v) for v in res.values()])
    for s, v in res.items():
        print(f"{spec.kind} sigma={s:g}: success {v:.3f}")
    write_manifest(out / "manifest.cfg", "montecarlo", cfg)
    return EXIT_OK


def cmd_benchmark(cfg) -> int:
    """Counted operations of the stage-1 estimators over a size sweep."""
    if cfg["method"] not in ("spline", "localpoly", "both"):
        raise UsageError("method must be spline, localpoly or both")
    if cfg["axis"] not in ("M", "N"):
        raise UsageError("axis must be M or N")
    methods = ["spline", "localpoly"] if cfg["method"] == "both" else [cfg["method"]]
    out = _outdir(cfg)
    slopes = {}
    with open(out / "benchmark.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "M", "N", "operations"])
        for m in methods:
            rep = benchmark(m, cfg["axis"], cfg["sizes"], cfg["fixed"])
            for row in rep["rows"]:
                w.writerow([m, *row])
            slopes[m] = rep["slope"]
            msg = "n/a" if rep["slope"] is None else f"{rep['slope']:.4f}"
            print(f"{m}: log-log slope in {cfg['axis']} = {msg}")
    _dump(out / "slopes.json", {"axis": cfg["axis"], "fixed": cfg["fixed"], "slopes": slopes})
    write_manifest(out / "manifest.cfg", "benchmark", cfg)
    return EXIT_OK


def cmd_forecast(cfg) -> int:
    """Identify on a training window, then Euler-forecast and score."""
    out = _outdir(cfg)
    if cfg["synthetic"].lower() in ("yes", "true", "1"):
        path = out / "synthetic_table.csv"
        write_table_csv(path, *synthetic_monthly_table(cfg["seed"]))
        cfg = dict(cfg, input=str(path))
    field = _input_field(cfg)
    g = field.grid
    k = cfg["train_steps"] if cfg["train_steps"] is not None else g.N // 2
    if not 4 <= k <= g.N:
        raise UsageError(f"train_steps must lie in [4, {g.N}]")
    train = field.__class__(Grid1D(g.x, g.t[:k]), field.values[:, :k])
    res = identify(train, _identify_config(cfg), cfg["true_support"])
    if res.chosen is None or not res.chosen.support:
        raise DataError("no nonempty model was identified on the training window")
    terms = model_terms(res.chosen)
    ax = cfg["forecast_alpha_x"] if cfg["forecast_alpha_x"] is not None else res.alpha_x
    summary = {"model": {str(l): c for l, c in terms}, "lambda": res.chosen.lam,
               "train_steps": k}
    fit = euler_forecast(train.values[:, 0], train.grid, res.chosen, alpha_x=ax)
    scored = score_forecast(fit, train)
    write_field_csv(fit, out / "fitted.csv")
    write_field_csv(scored.residual, out / "fitted_residual.csv")
    summary["fit"] = scored.summary()
    if k < g.N - 3:
        test = field.__class__(Grid1D(g.x, g.t[k:]), field.values[:, k:])
        pred = euler_forecast(test.values[:, 0], test.grid, res.chosen, alpha_x=ax)
        scored_t = score_forecast(pred, test)
        write_field_csv(pred, out / "predicted.csv")
        write_field_csv(scored_t.residual, out / "predicted_residual.csv")
        summary["test"] = scored_t.summary()
    _dump(out / "forecast.json", summary)
    write_manifest(out / "manifest.cfg", "forecast", cfg)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "identify": cmd_identify, "diagnose": cmd_diagnose,
            "montecarlo": cmd_montecarlo, "benchmark": cmd_benchmark, "forecast": cmd_forecast}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="splinepde", description="Identify 1-D PDEs from noisy lattice data.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, keys in COMMAND_KEYS.items():
        sp = sub.add_parser(name, help=(COMMANDS[name].__doc__ or name).strip().split("\n")[0])
        sp.add_argument("--config", help="key = value file; flags override it")
        for key in keys:
            flag = "--" + ("lambda" if key == "lam" else key.replace("_", "-"))
            sp.add_argument(flag, dest=key, default=None, metavar=key.upper())
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, ValueError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
