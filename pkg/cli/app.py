"""
Argument parsing and command dispatch.
"""
import argparse
import logging
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape

from cli.commands import cmd_bounds, cmd_certify, cmd_compare, cmd_plot, cmd_simulate
from models.config import ConfigLoader, RunConfig
from models.errors import SaiqhError

logger = logging.getLogger(__name__)

error_console = Console(stderr=True)

EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saiqh",
        description="Simulate and certify the SAIQH epidemic model on time scales.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="Configuration file, or a bare name under SAIQH_CONFIG_DIR")
    common.add_argument("--out", help="Output path (overrides the [output] section)")

    lambda_flag = argparse.ArgumentParser(add_help=False)
    lambda_flag.add_argument("--empirical", action="store_true",
                             help="Estimate lambdaL/lambdaU from a simulation run")

    subparsers.add_parser("simulate", parents=[common], help="Write the trajectory CSV")
    subparsers.add_parser("bounds", parents=[common, lambda_flag], help="Permanence bounds")
    subparsers.add_parser("certify", parents=[common, lambda_flag], help="Stability certificate")
    compare = subparsers.add_parser("compare", parents=[common, lambda_flag],
                                    help="Lyapunov decay between two runs")
    compare.add_argument("--second-initial", required=True, metavar="x1,...,x6",
                         help="Initial state of the second run")
    compare.add_argument("--psi", type=float, help="Decay rate to check instead of the certified one")
    subparsers.add_parser("plot", parents=[common], help="Render the trajectory CSV as SVG")
    return parser


def _dispatch(args: argparse.Namespace) -> Callable[[RunConfig], int]:
    handlers: Dict[str, Callable[[RunConfig], int]] = {
        "simulate": lambda c: cmd_simulate(c, out=args.out),
        "bounds": lambda c: cmd_bounds(c, empirical=args.empirical, out=args.out),
        "certify": lambda c: cmd_certify(c, empirical=args.empirical, out=args.out),
        "compare": lambda c: cmd_compare(
            c, args.second_initial, psi=args.psi, empirical=args.empirical, out=args.out
        ),
        "plot": lambda c: cmd_plot(c, out=args.out),
    }
    return handlers[args.command]


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit status."""
    args = build_parser().parse_args(argv)
    try:
        config = ConfigLoader().load(args.config)
        return _dispatch(args)(config)
    except (SaiqhError, ValidationError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        error_console.print(f"[red]error:[/red] {escape(str(e))}")
        return EXIT_ERROR
