"""Command-line front end.

Subcommands:
  run              one Monte-Carlo study, one results row
  toy {ic1,ic2,2d} the double-well toy protocols, one row per method
  sweep            Cartesian grid of studies from a JSON config
  list-objectives  names of the built-in objectives

Flag values override config-file values, which override the defaults
(the benchmark protocol: sigma=0.5, alpha=10, beta=10, T=15, 30000 steps,
M=5000). Exit codes: 0 ok, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, SuccessSpec
from .experiment import (expand_grid, format_result_row, results_csv,
                         run_monte_carlo, run_sweep, timeseries_csv,
                         toy_1d_config, toy_2d_config)
from .objectives import BUILTIN_NAMES, UnknownObjectiveError, get_objective

_METHOD_ALIASES = {"cbo": "CBO", "pb": "PB", "wpb": "wPB"}


def _method(value: str) -> str:
    try:
        return _METHOD_ALIASES[value.lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"method must be cbo, pb or wpb, got {value!r}")


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--objective", help="objective name (see list-objectives)")
    p.add_argument("--dim", type=int, help="space dimension d")
    p.add_argument("--particles", type=int, dest="n_particles", help="number of particles N")
    p.add_argument("--method", type=_method, help="cbo, pb or wpb")
    p.add_argument("--alpha", type=float, help="global-best weight sharpness")
    p.add_argument("--beta", type=float, help="personal-best weight sharpness")
    p.add_argument("--sigma", type=float, help="diffusion strength")
    p.add_argument("--lambda", type=float, dest="lambda_const",
                   help="constant drift coefficient in CBO mode")
    p.add_argument("--tfinal", type=float, dest="t_final", help="final time T")
    p.add_argument("--steps", type=int, dest="n_steps", help="number of time steps")
    p.add_argument("--mc", type=int, dest="n_mc", help="number of Monte-Carlo realizations M")
    p.add_argument("--seed", type=int, dest="base_seed", help="base RNG seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results invariant)")
    p.add_argument("--config", help="JSON config file; flags take precedence")
    p.add_argument("--out", default="-", help="results CSV path ('-' = stdout)")
    p.add_argument("--timeseries", action="store_true", default=None,
                   help="also emit mean time-series CSV(s); requires --out FILE")
    p.add_argument("--gate-mode", choices=("sharp", "smoothed"), dest="gate_mode")
    p.add_argument("--epsilon", type=float, help="smoothing width for smoothed gates")
    p.add_argument("--init-box", dest="init_box",
                   help='JSON init box, e.g. "[[-5.12,5.12],[-5.12,5.12]]"')
    p.add_argument("--success-criterion", dest="success_kind",
                   choices=("benchmark_ftol", "toy_radius", "toy_literal"))


def _flag_overrides(args) -> dict:
    fields = ("method", "objective", "dim", "n_particles", "alpha", "beta", "sigma",
              "lambda_const", "t_final", "n_steps", "n_mc", "base_seed",
              "timeseries", "gate_mode", "epsilon")
    out = {f: getattr(args, f) for f in fields if getattr(args, f, None) is not None}
    if getattr(args, "init_box", None) is not None:
        try:
            box = json.loads(args.init_box)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--init-box is not valid JSON: {exc.msg}")
        out["init"] = {"kind": "uniform_box", "box": box}
    if getattr(args, "success_kind", None) is not None:
        tol = 0.4 if args.success_kind in ("toy_radius", "toy_literal") else 0.1
        out["success"] = SuccessSpec(kind=args.success_kind, tol=tol)
    return out


def _load_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IOError(f"cannot read config file {path}: {exc}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path} at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("config JSON must be an object")
    return raw


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}")


def _timeseries_path(out: str, method: str) -> str:
    if out == "-":
        raise ConfigError("--timeseries needs --out FILE to derive series paths")
    p = Path(out)
    return str(p.with_name(f"{p.stem}_timeseries_{method}{p.suffix or '.csv'}"))


def _run_and_emit(configs, out, threads):
    """Run each config, log a line per row, write one CSV."""
    rows = []
    for cfg in configs:
        result = run_monte_carlo(cfg, threads=threads)
        rows.append((cfg, result.stats))
        print(f"[cbopt] {cfg.method:>3} {cfg.objective} d={cfg.dim} N={cfg.n_particles} "
              f"M={cfg.n_mc}: rate={result.stats.success_rate:.4f} "
              f"({result.stats.wall_s:.1f}s)", file=sys.stderr)
        if cfg.timeseries:
            _write(_timeseries_path(out, cfg.method),
                   timeseries_csv(result.t_grid, result.mean_dist_vf, result.mean_energy))
    _write(out, results_csv(rows))


def cmd_run(args) -> int:
    base = {"n_mc": 5000}
    if args.config:
        base.update(_load_config_file(args.config))
    base.update(_flag_overrides(args))
    if "objective" not in base:
        raise ConfigError("an objective is required (--objective or config file)")
    if "dim" not in base:
        spec = get_objective(base["objective"])  # fails unless dim is intrinsic
        base["dim"] = spec.dim
    base.setdefault("n_particles", 10 * base["dim"])
    cfg = ExperimentConfig.from_dict(base)
    get_objective(cfg.objective, cfg.dim)  # fail fast on bad names
    _run_and_emit([cfg], args.out, args.threads)
    return 0


def cmd_toy(args) -> int:
    over = _flag_overrides(args)
    over.pop("method", None)        # the toy comparison always runs all methods
    over.pop("objective", None)
    over.pop("dim", None)
    configs = []
    for method in ("CBO", "PB", "wPB"):
        if args.which == "2d":
            n = over.pop("n_particles", None) or 4
            cfg = toy_2d_config(method, n_particles=n, **over)
            over["n_particles"] = n
        else:
            over.pop("n_particles", None)
            cfg = toy_1d_config(args.which.upper(), method, **over)
        configs.append(cfg)
    _run_and_emit(configs, args.out, args.threads)
    return 0


def cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep requires --config FILE")
    raw = _load_config_file(args.config)
    configs = expand_grid(raw)
    rows = []
    for row in run_sweep(configs, threads=args.threads):
        if row.error is not None:
            print(f"[cbopt] row failed ({row.config.method} {row.config.objective}): "
                  f"{row.error}", file=sys.stderr)
        else:
            rows.append((row.config, row.stats))
            print(f"[cbopt] {row.config.method:>3} {row.config.objective} "
                  f"d={row.config.dim} N={row.config.n_particles}: "
                  f"rate={row.stats.success_rate:.4f}", file=sys.stderr)
    _write(args.out, results_csv(rows))
    return 0


def cmd_list_objectives(_args) -> int:
    for name in BUILTIN_NAMES:
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbopt",
                                     description="Consensus-based optimization harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one Monte-Carlo study")
    _add_common_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_toy = sub.add_parser("toy", help="double-well toy protocols, all methods")
    p_toy.add_argument("which", choices=("ic1", "ic2", "2d"))
    _add_common_flags(p_toy)
    p_toy.set_defaults(func=cmd_toy)

    p_sweep = sub.add_parser("sweep", help="Cartesian sweep from a JSON config")
    _add_common_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_list = sub.add_parser("list-objectives", help="list built-in objectives")
    p_list.set_defaults(func=cmd_list_objectives)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnknownObjectiveError, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"cbopt: error: {msg}", file=sys.stderr)
        return 2
    except IOError as exc:
        print(f"cbopt: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
