"""Subcommands of the `fairwasp` command-line tool.

Each module exposes `register(subparsers)` and `run(args) -> int`.
"""
import argparse
import logging
from typing import Optional

import numpy as np
from pydantic import ValidationError

from fairwasp.config import (
    COMPLETION, CSV_DELIMITER, COST_CACHE_DIR, COST_METRIC, DEFAULT_EPSILON, DEFAULT_GAP_TOL,
    DEFAULT_LAMBDA_MAX, DEFAULT_MAX_ITERS, INCLUDE_D_IN_FEATURES, STANDARDIZE, default_threads
)
from fairwasp.data.dataset import Dataset, MarginalY, load_csv
from fairwasp.errors import ConfigurationError
from fairwasp.solver.accpm import SolverConfig
from fairwasp.solver.cost import METRICS
from fairwasp.solver.recover import WeightVector, read_weights_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3
EXIT_ITERATION_LIMIT = 4

STATUS_EXIT_CODES = {
    "converged": EXIT_OK,
    "converged-with-ties": EXIT_OK,
    "infeasible": EXIT_INFEASIBLE,
    "numerical-failure": EXIT_NUMERICAL,
    "iteration-limit": EXIT_ITERATION_LIMIT,
}


def exit_code_for(status: str) -> int:
    return STATUS_EXIT_CODES.get(status, EXIT_ERROR)


def add_dataset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="Input CSV with a header row")
    parser.add_argument("--d-col", required=True, help="Protected-attribute column")
    parser.add_argument("--y-col", required=True, help="Outcome column")
    parser.add_argument("--include-d-in-features", action="store_true", default=INCLUDE_D_IN_FEATURES,
                        help="Also use the protected column as a feature")
    parser.add_argument("--delimiter", default=CSV_DELIMITER, help="CSV field delimiter")


def add_cost_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-standardize", dest="standardize", action="store_false", default=STANDARDIZE,
                        help="Use raw feature scales")
    parser.add_argument("--metric", choices=METRICS, default=COST_METRIC, help="Ground cost")
    parser.add_argument("--cache-dir", default=COST_CACHE_DIR, help="Directory for cached compressed costs")


def add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="Fairness tolerance")
    parser.add_argument("--gap-tol", type=float, default=DEFAULT_GAP_TOL, help="Relative duality gap to stop at")
    parser.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS, help="Cutting-plane iteration limit")
    parser.add_argument("--lambda-max", type=float, default=DEFAULT_LAMBDA_MAX, help="Initial multiplier box scale")
    parser.add_argument("--no-completion", dest="completion", action="store_false", default=COMPLETION,
                        help="Skip the exact integer step when the duality gap stays open")


def load_dataset(args: argparse.Namespace) -> Dataset:
    return load_csv(
        args.input,
        args.d_col,
        args.y_col,
        include_d_in_features=args.include_d_in_features,
        delimiter=args.delimiter,
    )


def threads_from(args: argparse.Namespace) -> int:
    threads = getattr(args, "threads", None)
    if threads is None:
        return default_threads()
    if threads < 1:
        raise ConfigurationError(f"--threads must be >= 1, got {threads}")
    return threads


def solver_config_from(args: argparse.Namespace) -> SolverConfig:
    """SolverConfig from CLI flags; settings supply everything not on the command line."""
    try:
        return SolverConfig(
            gap_tol=args.gap_tol,
            max_iters=args.max_iters,
            lambda_max=args.lambda_max,
            completion=args.completion,
            threads=threads_from(args),
        )
    except ValidationError as e:
        raise ConfigurationError(f"Invalid solver settings: {e}")


def check_epsilon(epsilon: float) -> float:
    if not np.isfinite(epsilon) or epsilon < 0:
        raise ConfigurationError(f"--epsilon must be >= 0, got {epsilon}")
    return epsilon


def parse_target(text: Optional[str], n_y: int) -> Optional[MarginalY]:
    """Comma-separated target marginal, one entry per outcome label."""
    if text is None:
        return None
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"--target must be comma-separated numbers, got '{text}'")
    if len(values) != n_y:
        raise ConfigurationError(f"--target has {len(values)} entries, dataset has {n_y} outcome labels")
    return MarginalY(np.asarray(values))


def load_weights(source: str, n: int) -> WeightVector:
    """`uniform` or a weights CSV path."""
    if source == "uniform":
        return WeightVector.uniform(n)
    return read_weights_csv(source, n)
