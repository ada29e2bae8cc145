"""Coverage studies for ground and aerial cellular users (command-line entry point).

Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 unwritable output, 5 iteration count too small.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..antenna import write_pattern_csv
from ..channel import golden_table, write_golden_csv
from ..config import ConfigError, SystemConfig
from ..coverage import IntegrationError
from ..critical_height import CriticalHeightError
from .studies import STUDIES, IterationError, OutputError, StudySpec, load_config, run_study

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OUTPUT, EXIT_ITERATIONS = 0, 2, 3, 4, 5

log = logging.getLogger("aerocov")

GOLDEN_R = (10.0, 36.0, 100.0, 500.0, 1000.0, 3000.0)
GOLDEN_H = (1.5, 15.0, 22.5, 50.0, 100.0, 200.0)
GOLDEN_FC = (5.0, 28.0)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="YAML study file")
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int, help="Monte-Carlo iterations")
    p.add_argument("--realizations", type=int, help="PPP realizations for analytic methods")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--methods", help="comma-separated methods")
    p.add_argument("--no-plots", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aerocov", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named study")
    run.add_argument("study", choices=[s for s in STUDIES])
    _common(run)

    ch = sub.add_parser("critical-height", help="solve for the critical aerial-user height")
    _common(ch)
    ch.add_argument("--thresholds", help="comma-separated SINR thresholds (dB)")

    pat = sub.add_parser("pattern-dump", help="write a vertical antenna pattern cut as CSV")
    pat.add_argument("--config", type=Path)
    pat.add_argument("--out", type=Path, default=Path("pattern.csv"))
    pat.add_argument("--phi", type=float, default=0.0)
    pat.add_argument("--step", type=float, default=0.1)

    gold = sub.add_parser("goldens", help="write the path-loss / LOS golden table as CSV")
    gold.add_argument("--config", type=Path)
    gold.add_argument("--out", type=Path, default=Path("goldens.csv"))
    return parser


def _spec(args, study: str) -> StudySpec:
    overrides = {
        "master_seed": args.seed, "iterations": args.iterations, "realizations": args.realizations,
        "output_dir": args.out,
        "methods": tuple(args.methods.split(",")) if args.methods else None,
        "plots": False if args.no_plots else None,
    }
    if getattr(args, "thresholds", None):
        overrides["thresholds"] = tuple(float(t) for t in args.thresholds.split(","))
    if args.config is not None:
        return load_config(args.config, study=study, **overrides)
    return StudySpec(study=study, **{k: v for k, v in overrides.items() if v is not None})


def _base_config(path) -> SystemConfig:
    return load_config(path).base_config if path is not None else SystemConfig()


def _dispatch(args) -> int:
    if args.command == "run":
        files = run_study(_spec(args, args.study))
    elif args.command == "critical-height":
        files = run_study(_spec(args, "critical_height"))
    elif args.command == "pattern-dump":
        files = {"pattern": write_pattern_csv(args.out, _base_config(args.config).antenna, args.phi, args.step)}
    else:
        rows = golden_table(GOLDEN_R, GOLDEN_H, GOLDEN_FC, _base_config(args.config))
        files = {"goldens": write_golden_csv(args.out, rows)}
    for name, path in files.items():
        print(f"{name}: {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _dispatch(args)
    except IterationError as exc:
        log.error("iteration error: %s", exc)
        return EXIT_ITERATIONS
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (OutputError, PermissionError) as exc:
        log.error("output error: %s", exc)
        return EXIT_OUTPUT
    except (CriticalHeightError, IntegrationError, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
