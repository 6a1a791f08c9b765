"""Command-line entry point for FairWASP."""
import argparse
import logging
import sys
from typing import List, Optional

from fairwasp import __version__
from fairwasp.commands import EXIT_ERROR, bench, materialize, oracle, solve, solve_pw, synth, verify
from fairwasp.errors import FairwaspError
from fairwasp.utils.logger import setup_logging

logger = logging.getLogger(__name__)

COMMANDS = (solve, solve_pw, verify, materialize, synth, bench, oracle)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairwasp",
        description="Fair integer sample weights by Wasserstein-optimal reweighting",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, default=None,
                        help="Worker threads for cost compression and dual evaluation (default: all cores)")
    parser.add_argument("--log-level", default=None, help="Overrides FAIRWASP_LOG and settings")
    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    try:
        return args.handler(args)
    except FairwaspError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"{args.command}: I/O error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
