"""Command line front end.

Exit codes: 0 on success, 1 for configuration problems (bad arguments,
invalid config files, a violated phase condition), 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from .dynamics import EventDensityError, check_phase_condition
from .scenario import (
    ConfigError,
    GUJC_HORIZON_WINDOWS,
    TAU_A_FRACTION,
    default_scenario_path,
    parse_config,
    run_scenario,
)
from .switching import JointGraphParams, check_gujc, connectivity_margin

__all__ = ["main", "cli_dispatch"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of calling sys.exit(2)."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="swsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("simulate", help="run a scenario config and write csv + report")
    p.add_argument("config", help="path to a scenario json file")
    p.add_argument("--out", default=None, help="output csv path (report goes next to it)")

    p = sub.add_parser("check-gujc", help="check joint connectivity over a horizon")
    p.add_argument("config", help="path to a scenario json file")
    p.add_argument("--horizon", type=float, default=None,
                   help="horizon in seconds (default: 20 excitation half-cycles)")

    p = sub.add_parser("epsilon", help="print the connectivity margin of the graph family")
    p.add_argument("config", help="path to a scenario json file")

    p = sub.add_parser("phase-check", help="verify the excitation phase condition")
    p.add_argument("config", help="path to a scenario json file")

    p = sub.add_parser("reproduce-4d", help="run the bundled four-robot benchmark")
    p.add_argument("--t-prime", type=float, default=None,
                   help="switching period override (also rescales the excitation)")
    p.add_argument("--out", default=None, help="output directory (default: current)")
    p.add_argument("--tf", type=float, default=None, help="final time override")
    p.add_argument("--step", type=float, default=None, help="integrator step override")
    p.add_argument("--seed", type=int, default=None, help="initial-condition seed override")

    p = sub.add_parser("gronwall-selftest", help="randomized comparison-lemma checks")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("lemma-selftest", help="randomized Laplacian identity checks")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _joint_params(cfg) -> tuple[JointGraphParams, float]:
    window = cfg.t_small
    return JointGraphParams(tau_a=window * TAU_A_FRACTION, window=window), window


def _cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    report, _ = run_scenario(cfg, out_path=args.out)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True, default=_json_num))
    return 0


def _cmd_check_gujc(args) -> int:
    cfg = parse_config(args.config)
    params, window = _joint_params(cfg)
    horizon = args.horizon if args.horizon is not None else GUJC_HORIZON_WINDOWS * window
    if horizon < window:
        raise _UsageError("horizon must be at least one window")
    rep = check_gujc(cfg.schedule_obj(), cfg.family(), params, horizon)
    print(f"tau_a = {rep.tau_a:.9g}, window = {rep.window:.9g}, horizon = {rep.horizon:.9g}")
    print(f"window starts checked: {rep.grid_size}")
    if rep.holds_on_horizon:
        print("joint connectivity holds on every checked window")
        return 0
    print(f"FAILED: window starting at t = {rep.witness_t:.9g} has no connected joint graph")
    return 2


def _cmd_epsilon(args) -> int:
    cfg = parse_config(args.config)
    params, _ = _joint_params(cfg)
    margin = connectivity_margin(cfg.family(), params.tau_a)
    print(f"connectivity margin = {margin:.12g} (tau_a = {params.tau_a:.9g})")
    return 0


def _cmd_phase_check(args) -> int:
    cfg = parse_config(args.config, enforce_phase=False)
    check = check_phase_condition(cfg.profile())
    print(f"phase integral = {check.integral:.12g}")
    print(f"distance to nearest multiple of pi (k = {check.nearest_k}): {check.distance:.3e}")
    if check.ok:
        print("phase condition satisfied")
        return 0
    print("phase condition VIOLATED: the heading excitation averages out")
    return 1


def _cmd_reproduce(args) -> int:
    with open(default_scenario_path(), encoding="utf-8") as fh:
        doc = json.load(fh)
    if args.t_prime is not None:
        if args.t_prime <= 0.0:
            raise _UsageError("--t-prime must be positive")
        ratio = args.t_prime / doc["schedule"]["t_prime"]
        doc["schedule"]["t_prime"] = args.t_prime
        doc["excitation"]["T"] = args.t_prime
        doc["excitation"]["T0"] = 3.0 * args.t_prime
        doc["integrator"]["tf"] = doc["integrator"]["tf"] * ratio
    if args.tf is not None:
        doc["integrator"]["tf"] = args.tf
    if args.step is not None:
        doc["integrator"]["step"] = args.step
    if args.seed is not None:
        doc["init"]["seed"] = args.seed
    out_dir = pathlib.Path(args.out) if args.out is not None else pathlib.Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    doc["output"] = str(out_dir / "section4d.csv")
    cfg = parse_config(doc)
    report, _ = run_scenario(cfg)
    print(f"csv written to {report.csv_path}")
    print(f"report written to {report.report_path}")
    print(f"final consensus distance = {report.final_distance:.6e}")
    if report.time_to_threshold is not None:
        print(f"reached {report.threshold:g} at t = {report.time_to_threshold:.6g}")
    else:
        print(f"threshold {report.threshold:g} not reached by tf")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _cmd_gronwall_selftest(args) -> int:
    from .selftest import gronwall_suite

    lines = gronwall_suite(np.random.default_rng(args.seed), args.trials)
    for line in lines:
        print(line.render())
    return 0 if all(line.ok for line in lines) else 2


def _cmd_lemma_selftest(args) -> int:
    from .selftest import laplacian_identity_suite

    lines = laplacian_identity_suite(np.random.default_rng(args.seed), args.trials)
    for line in lines:
        print(line.render())
    return 0 if all(line.ok for line in lines) else 2


def _json_num(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not json serializable: {type(obj)!r}")


_COMMANDS = {
    "simulate": _cmd_simulate,
    "check-gujc": _cmd_check_gujc,
    "epsilon": _cmd_epsilon,
    "phase-check": _cmd_phase_check,
    "reproduce-4d": _cmd_reproduce,
    "gronwall-selftest": _cmd_gronwall_selftest,
    "lemma-selftest": _cmd_lemma_selftest,
}


def cli_dispatch(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_help()
        return 1
    handler = _COMMANDS[args.command]
    try:
        return handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EventDensityError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch())
