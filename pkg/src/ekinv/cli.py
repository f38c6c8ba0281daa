"""Command-line experiment runner.

Exit codes: 0 success, 2 configuration error, 3 numerical abort.
Log verbosity is controlled by the EKINV_LOG environment variable
(debug/info/warning/error; default warning).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from .experiments import (
    PRESETS,
    ConfigError,
    emit_outputs,
    load_config,
    preset_config,
    run_experiment,
)
from .model import EkinvError

log = logging.getLogger("ekinv")


def _setup_logging() -> None:
    level = os.environ.get("EKINV_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _limit_threads():
    """Pin BLAS pools to one thread: the dense blocks here are small, and
    a fixed reduction order keeps diagnostics byte-reproducible."""
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=1)
    except ImportError:  # pragma: no cover - threadpoolctl is a test extra
        return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ekinv",
        description="Run ensemble Kalman inversion experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a TOML experiment file")
    src.add_argument("--preset", help="name of a built-in experiment")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the algorithm rng seed")

    sub.add_parser("list-presets", help="list built-in experiments")

    val_p = sub.add_parser("validate", help="check a config file")
    val_p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)

    if args.command == "list-presets":
        for name in sorted(PRESETS):
            first_line = PRESETS[name].lstrip("# ").splitlines()[0]
            desc = first_line if PRESETS[name].startswith("#") else ""
            print(f"{name:38s} {desc}")
        return 0

    if args.command == "validate":
        try:
            load_config(args.config)
        except (OSError, ConfigError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        print("ok")
        return 0

    # run
    try:
        if args.preset is not None:
            cfg = preset_config(args.preset)
        else:
            cfg = load_config(args.config)
        if args.seed is not None:
            text = cfg.source_text + (
                f"\n# rng_seed overridden to {args.seed} on the command line\n"
            )
            cfg = dataclasses.replace(cfg, rng_seed=args.seed,
                                      source_text=text)
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    limiter = _limit_threads()
    try:
        record = run_experiment(cfg)
        written = emit_outputs(record, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EkinvError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    finally:
        if limiter is not None:
            limiter.unregister()

    print(f"stopped at t={record.stop_time:g} ({record.stop_reason}); "
          f"wall clock {record.wall_clock:.2f}s")
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
