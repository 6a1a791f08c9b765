"""`fairwasp bench`: scaling study on synthetic data with n doubling."""
import argparse
import logging
import sys
from typing import Dict, List

import numpy as np
import pandas as pd

from fairwasp.commands import (
    EXIT_ERROR, EXIT_OK, check_epsilon, exit_code_for, solver_config_from, threads_from
)
from fairwasp.config import (
    BENCH_EPSILON, BENCH_N_END, BENCH_N_START, BENCH_SEED, BENCH_TRIALS, COST_METRIC,
    COMPLETION, DEFAULT_GAP_TOL, DEFAULT_LAMBDA_MAX, DEFAULT_MAX_ITERS
)
from fairwasp.data.synthetic import generate_synthetic
from fairwasp.errors import ConfigurationError
from fairwasp.oracle.brute import MAX_LP_N, solve_lp
from fairwasp.solver.cost import METRICS
from fairwasp.solver.pipeline import prepare, solve_problem
from fairwasp.solver.recover import relative_objective_gap

logger = logging.getLogger(__name__)

BENCH_COLUMNS = [
    "n", "trial", "seed", "compress_s", "solve_s", "recover_s", "rel_gap", "violation",
    "wasserstein", "iterations", "status",
]
TIMING_COLUMNS = ("compress_s", "solve_s", "recover_s")


def register(subparsers) -> None:
    parser = subparsers.add_parser("bench", help="Synthetic scaling benchmark")
    parser.add_argument("--n-start", type=int, default=BENCH_N_START, help="Smallest n")
    parser.add_argument("--n-end", type=int, default=BENCH_N_END, help="Largest n (doubling from n-start)")
    parser.add_argument("--trials", type=int, default=BENCH_TRIALS, help="Trials per n")
    parser.add_argument("--seed", type=int, default=BENCH_SEED, help="Base seed")
    parser.add_argument("--epsilon", type=float, default=BENCH_EPSILON, help="Fairness tolerance")
    parser.add_argument("--gap-tol", type=float, default=DEFAULT_GAP_TOL, help="Relative duality gap to stop at")
    parser.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS, help="Cutting-plane iteration limit")
    parser.add_argument("--lambda-max", type=float, default=DEFAULT_LAMBDA_MAX, help="Initial multiplier box scale")
    parser.add_argument("--no-completion", dest="completion", action="store_false", default=COMPLETION,
                        help="Skip the exact integer step when the duality gap stays open")
    parser.add_argument("--metric", choices=METRICS, default=COST_METRIC, help="Ground cost")
    parser.add_argument("--oracle-max-n", type=int, default=0,
                        help=f"Also compare against the LP oracle when n is at most this (capped at {MAX_LP_N})")
    parser.add_argument("--out", default=None, help="CSV to write; stdout when omitted")
    parser.set_defaults(handler=run)


def sizes(n_start: int, n_end: int) -> List[int]:
    """n_start, 2 n_start, ... up to n_end."""
    if n_start < 2:
        raise ConfigurationError(f"--n-start must be >= 2, got {n_start}")
    if n_start > n_end:
        raise ConfigurationError(f"--n-start ({n_start}) exceeds --n-end ({n_end})")
    result = []
    n = n_start
    while n <= n_end:
        result.append(n)
        n *= 2
    return result


def trial_seed(base: int, n: int, trial: int) -> int:
    """Independent, reproducible seed per (n, trial)."""
    return int(np.random.SeedSequence([base, n, trial]).generate_state(1)[0])


def run_trial(n: int, trial: int, args: argparse.Namespace, cfg) -> Dict[str, object]:
    seed = trial_seed(args.seed, n, trial)
    ds = generate_synthetic(n, seed)
    problem = prepare(ds, metric=args.metric, threads=threads_from(args))
    outcome = solve_problem(problem, args.epsilon, cfg)
    row = {
        "n": n,
        "trial": trial,
        "seed": seed,
        "compress_s": outcome.timings["compress"],
        "solve_s": outcome.timings["solve"],
        "recover_s": outcome.timings["recover"],
        "rel_gap": outcome.report.rel_gap,
        "violation": outcome.violation,
        "wasserstein": outcome.wasserstein,
        "iterations": outcome.report.iterations,
        "status": outcome.status,
    }
    if n <= min(args.oracle_max_n, MAX_LP_N):
        lp = solve_lp(problem.ds, problem.p_y, args.epsilon, metric=args.metric)
        row["oracle_rel_gap"] = relative_objective_gap(outcome.objective, lp.objective) if lp.feasible else None
    logger.info(f"bench n={n} trial={trial}: status={outcome.status} gap={outcome.report.rel_gap} "
                f"compress={row['compress_s']:.3f}s solve={row['solve_s']:.3f}s")
    return row


def run(args: argparse.Namespace) -> int:
    check_epsilon(args.epsilon)
    if args.trials < 1:
        raise ConfigurationError(f"--trials must be >= 1, got {args.trials}")
    cfg = solver_config_from(args)
    rows = [run_trial(n, trial, args, cfg) for n in sizes(args.n_start, args.n_end) for trial in range(args.trials)]

    columns = BENCH_COLUMNS + (["oracle_rel_gap"] if any("oracle_rel_gap" in r for r in rows) else [])
    table = pd.DataFrame(rows, columns=columns)
    if args.out:
        table.to_csv(args.out, index=False, float_format="%.10g", lineterminator="\n")
        logger.info(f"Benchmark table written to {args.out}")
    else:
        table.to_csv(sys.stdout, index=False, float_format="%.10g", lineterminator="\n")

    codes = [exit_code_for(status) for status in table["status"]]
    worst = max(codes) if codes else EXIT_ERROR
    if worst != EXIT_OK:
        logger.warning(f"{sum(c != EXIT_OK for c in codes)} of {len(codes)} runs did not converge")
    return worst
