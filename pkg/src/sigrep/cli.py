"""Batch command-line interface.

Subcommands: ``check`` (invariant suites, JSON report), ``simulate``
(trajectory CSV), ``table`` (MSE tables), ``approx-kernel`` (atom-mixture
kernel approximation).  Outputs are UTF-8 CSV with newline line endings;
identical configuration and master seed give byte-identical files for any
thread count, because paths are pure functions of (seed, index) and
reductions run in path order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .brownian import TimeGrid
from .checks import run_check_suite
from .experiments import (
    MseTable,
    delay_mse_table,
    delay_trajectories,
    mixture_volterra_vs_shifted_rl_mse,
    ou_trajectories,
    rl_kernel_l2_error,
    rl_mse_table,
    rl_trajectories,
    volterra_trajectories,
)
from .models import (
    delay_params_from_dict,
    fractional_dirac_mixture,
    volterra_params_from_dict,
)

DESK_SCALE = {"paths": 10_000, "paths_deep": 2_000, "steps": 500}
FULL_SCALE = {"paths": 100_000, "paths_deep": 100_000, "steps": 1_000}
DEFAULT_EPS = 1.0 / 52.0
DEFAULT_TRUNCATIONS = (2, 4, 8, 16)


def _parse_truncations(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad truncation list {text!r}") from exc
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("truncations must be positive integers")
    return values


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigrep",
        description="Signature representations of Volterra, delay and Gaussian processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="TOML file with model parameters and run settings")
        p.add_argument("--paths", type=_positive_int, help="number of Monte-Carlo paths")
        p.add_argument("--steps", type=_positive_int, help="time steps on [0, tmax]")
        p.add_argument("--truncation", type=_parse_truncations, help="comma-separated levels")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--tmax", type=float, help="time horizon")
        p.add_argument("--eps", type=float, help="kernel shift for the power-law model")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=_positive_int, help="compute threads for the stepper")
        p.add_argument("--full-scale", action="store_true", help="100,000 paths over 1000 steps")

    p_check = sub.add_parser("check", help="run the invariant suites")
    p_check.add_argument("--level", type=_positive_int, default=6, help="truncation level (>= 1)")
    add_common(p_check)

    p_sim = sub.add_parser("simulate", help="write reference vs truncated trajectories")
    p_sim.add_argument("--model", choices=("rl", "delay", "volterra", "ou"), help="model id")
    p_sim.add_argument("--hurst", type=float, help="Hurst index for the rl model")
    add_common(p_sim)

    p_table = sub.add_parser("table", help="reproduce an MSE table")
    p_table.add_argument("which", choices=("rl-mse", "delay-mse"))
    add_common(p_table)

    p_kernel = sub.add_parser("approx-kernel", help="atom-mixture approximation of the power-law kernel")
    p_kernel.add_argument("--hurst", type=float, help="Hurst index in (0, 1/2)")
    p_kernel.add_argument("--atoms", type=_parse_truncations, default=[10, 20, 40, 80],
                          help="comma-separated atom counts")
    p_kernel.add_argument("--ratio", type=float,
                          help="override the geometric spacing ratio (default 1 + 10 n^-0.9)")
    add_common(p_kernel)
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _run_settings(args, config: dict) -> dict:
    run = dict(DESK_SCALE)
    run.update(
        {"tmax": 1.0, "eps": DEFAULT_EPS, "seed": 0, "truncations": list(DEFAULT_TRUNCATIONS),
         "out": ".", "threads": None, "trajectory_paths": 1}
    )
    if args.full_scale:
        run.update(FULL_SCALE)
    section = config.get("run", {})
    for key in ("paths", "paths_deep", "steps", "tmax", "eps", "seed", "out", "trajectory_paths"):
        if key in section:
            run[key] = section[key]
    if "truncations" in section:
        run["truncations"] = [int(v) for v in section["truncations"]]
    overrides = {
        "paths": args.paths, "steps": args.steps, "tmax": args.tmax, "eps": args.eps,
        "seed": args.seed, "out": args.out, "threads": args.threads,
        "truncations": args.truncation,
    }
    for key, value in overrides.items():
        if value is not None:
            run[key] = value
    return run


def _apply_threads(run: dict) -> None:
    if run.get("threads"):
        import numba

        numba.set_num_threads(int(run["threads"]))


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_csv(path: str, header: list[str], rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_table(path: str, table: MseTable) -> None:
    header = ["M"] + list(table.scenarios)
    rows = (
        [str(cap)] + [_fmt(c) for c in table.cells[i]]
        for i, cap in enumerate(table.truncations)
    )
    _write_csv(path, header, rows)


def cmd_check(args) -> int:
    config = _load_config(args.config)
    run = _run_settings(args, config)
    _apply_threads(run)
    paths = run["paths"] if args.paths else min(run["paths"], 2000)
    report = run_check_suite(args.level, run["seed"], paths)
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "check_report.json"), "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if not report["passed"]:
        failing = [e["name"] for e in report["invariants"] if not e["passed"]]
        print(f"FAILED invariants: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    run = _run_settings(args, config)
    _apply_threads(run)
    model = args.model or config.get("model", "rl")
    grid = TimeGrid(run["tmax"], run["steps"])
    caps = run["truncations"]
    n_paths = run["trajectory_paths"] if args.paths is None else args.paths
    seed = run["seed"]
    if model == "rl":
        rl_cfg = config.get("rl", {})
        hurst = args.hurst if args.hurst is not None else rl_cfg.get("H", 0.3)
        eps = rl_cfg.get("eps", run["eps"])
        series = rl_trajectories(hurst, eps, caps, grid, seed, n_paths)
    elif model == "delay":
        params = delay_params_from_dict(config.get("delay", {}))
        series = delay_trajectories(params, caps, grid, seed, n_paths)
    elif model == "volterra":
        params = volterra_params_from_dict(config.get("volterra", {}))
        series = volterra_trajectories(params, caps, grid, seed, n_paths)
    else:
        kappa = config.get("ou", {}).get("kappa", 1.0)
        series = ou_trajectories(kappa, caps, grid, seed, n_paths)
    times = grid.times()
    names = ["ref"] + [f"sig_M{cap}" for cap in caps]

    def rows():
        for pid in range(n_paths):
            for name in names:
                values = series[name][pid]
                for k, t in enumerate(times):
                    yield [_fmt(t), str(pid), name, _fmt(values[k])]

    _write_csv(os.path.join(run["out"], "trajectories.csv"), ["t", "path_id", "series", "value"], rows())
    return 0


def cmd_table(args) -> int:
    config = _load_config(args.config)
    run = _run_settings(args, config)
    _apply_threads(run)
    grid = TimeGrid(run["tmax"], run["steps"])
    caps = run["truncations"]
    if args.which == "rl-mse":
        hursts = config.get("rl", {}).get("H_list", [0.1, 0.3, 0.7, 0.9])
        table = rl_mse_table(
            hursts, caps, grid, run["eps"], run["paths"], run["paths_deep"], run["seed"]
        )
        _write_table(os.path.join(run["out"], "table_rl_mse.csv"), table)
    else:
        scenarios = _delay_scenarios(config)
        table = delay_mse_table(
            scenarios, caps, grid, run["paths"], run["paths_deep"], run["seed"]
        )
        _write_table(os.path.join(run["out"], "table_delay_mse.csv"), table)
    return 0


def _delay_scenarios(config: dict):
    if "delay" in config:
        return [("custom", delay_params_from_dict(config["delay"]))]
    return [
        ("a", delay_params_from_dict(
            {"z": 0.0, "a1": 1.5, "b1": 0.0, "k1": [[-1.0, -2.0]],
             "a2": 3.0, "b2": 0.0, "k2": [[-2.0, -1.0]]})),
        ("b", delay_params_from_dict(
            {"z": 0.0, "a1": -1.0, "b1": -2.0, "k1": [[2.0, -3.0]],
             "a2": 1.0, "b2": 1.0, "k2": [[1.0, -3.0]]})),
    ]


def cmd_approx_kernel(args) -> int:
    config = _load_config(args.config)
    run = _run_settings(args, config)
    _apply_threads(run)
    hurst = args.hurst if args.hurst is not None else config.get("rl", {}).get("H", 0.1)
    horizon = run["tmax"]
    header = ["n", "l2_error"]
    mc_paths = args.paths or 0
    if mc_paths:
        header.append("mse_vs_shifted_rl")
    rows = []
    grid = TimeGrid(horizon, run["steps"])
    for n in args.atoms:
        mixture = fractional_dirac_mixture(hurst, n, ratio=args.ratio)
        row = [str(n), _fmt(rl_kernel_l2_error(mixture, hurst, horizon))]
        if mc_paths:
            cap = max(c for c in run["truncations"] if c <= 8)
            row.append(_fmt(mixture_volterra_vs_shifted_rl_mse(
                mixture, hurst, run["eps"], cap, grid, mc_paths, run["seed"]
            )))
        rows.append(row)
    _write_csv(os.path.join(run["out"], "kernel_approx.csv"), header, rows)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "check": cmd_check,
        "simulate": cmd_simulate,
        "table": cmd_table,
        "approx-kernel": cmd_approx_kernel,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
