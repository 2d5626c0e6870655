"""Command-line front end.

Every subcommand loads the TOML config (or the built-in defaults), applies
the common overrides, runs one experiment, and writes its result table(s)
under the output directory. Exit status 0 on success; validation problems
print a diagnostic to stderr and exit 2, I/O problems exit 1.
"""
from __future__ import annotations

import argparse
import sys

from . import experiment
from .config import (
    ConfigError,
    ExperimentConfig,
    default_config,
    load_config,
    with_cli_overrides,
)
from .thermal import PRESETS


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="TOML experiment config (defaults built in)")
    parser.add_argument("--seed", type=int, metavar="U64",
                        help="override the master seed")
    parser.add_argument("--out", metavar="DIR",
                        help="override the output directory")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        help="override the output format")
    parser.add_argument("--env", choices=tuple(PRESETS),
                        help="override the environment preset")


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else default_config()
    return with_cli_overrides(cfg, seed=args.seed, out_dir=args.out,
                              out_format=args.fmt, env_name=args.env)


def _emit(cfg: ExperimentConfig, tables) -> int:
    for table in tables:
        path = experiment.emit(table, cfg.out_dir, cfg.out_format)
        print(f"wrote {path}")
    return 0


def _cmd_cool(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    return _emit(cfg, [experiment.run_cooling_curve(cfg)])


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    result = experiment.run_accuracy_sweep(cfg)
    return _emit(cfg, [experiment.sweep_table(result)])


def _cmd_two_user(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    result = experiment.run_two_user_sweep(cfg)
    return _emit(cfg, [experiment.two_user_table(result)])


def _cmd_bandwidth(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    return _emit(cfg, [experiment.run_bandwidth_table(cfg),
                       experiment.run_disk_scaling(cfg)])


def _cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    return _emit(cfg, [experiment.run_calibration(cfg)])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermossd",
        description="Thermal covert-channel simulator for computational storage",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    commands = (
        ("cool", _cmd_cool, "record a heat-up/cool-down curve"),
        ("sweep", _cmd_sweep, "decode accuracy vs read delay (single tenant)"),
        ("two-user", _cmd_two_user, "decode accuracy vs extra wait (two tenants)"),
        ("bandwidth", _cmd_bandwidth, "bandwidth tables for the rental timelines"),
        ("calibrate", _cmd_calibrate, "thresholds and the analytic channel curve"),
    )
    for name, func, help_text in commands:
        cmd = sub.add_parser(name, help=help_text)
        _add_common_options(cmd)
        cmd.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help and usage errors
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
