# src/cli.py
"""Command-line surface: one subcommand per experiment kind."""
from __future__ import annotations

import argparse
import logging
from typing import Sequence

from src.config import ExperimentKind, load_config
from src.constants import DEFAULT_SHOTS
from src.engine import run
from src.errors import SpinBosonError
from src.models import RateConvention

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, force=True)


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--xi", type=float, nargs="+", help="noise factors in [0, 1]")
    parser.add_argument("--dt", type=float, nargs="+", help="Trotter time steps")
    parser.add_argument("--order", type=int, nargs="+", choices=(1, 2), help="Trotter orders")
    parser.add_argument("--gamma", type=float, nargs="+", help="dissipation rates")
    parser.add_argument("--t-final", type=float, help="evolution end time")
    parser.add_argument(
        "--convention",
        choices=[c.value for c in RateConvention],
        help="how gamma enters the dissipator",
    )
    parser.add_argument(
        "--shots",
        type=int,
        nargs="?",
        const=DEFAULT_SHOTS,
        help=f"sample measurements (default {DEFAULT_SHOTS} shots when given bare)",
    )
    parser.add_argument("--seed", type=int, help="seed for shot sampling")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--calibration", help="device calibration JSON")
    parser.add_argument("--workers", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spin-boson-dqs",
        description="Noisy digital simulation of the open spin-boson model",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="EXPERIMENT")
    for kind in ExperimentKind:
        _add_experiment_flags(sub.add_parser(kind.value, help=kind.value.replace("_", " ")))
    return parser


def overrides_from(args: argparse.Namespace) -> dict:
    """Config fields set on the command line (unset flags are left out)."""
    return {
        "xi_grid": args.xi,
        "dt_grid": args.dt,
        "orders": args.order,
        "gamma_grid": args.gamma,
        "t_final": args.t_final,
        "convention": args.convention,
        "shots": args.shots,
        "seed": args.seed,
        "output_dir": args.out,
        "calibration": args.calibration,
        "workers": args.workers,
    }


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = load_config(args.kind, args.config, overrides_from(args))
        outputs = run(config)
    except SpinBosonError as exc:
        logger.error("%s", exc)
        return 1
    logger.info("results: %s (manifest %s)", outputs.csv, outputs.manifest)
    return 0
