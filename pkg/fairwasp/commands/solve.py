"""`fairwasp solve`: marginal-targeted reweighting."""
import argparse
import json
import logging
import sys

import numpy as np

from fairwasp.commands import (
    add_cost_args, add_dataset_args, add_solver_args, check_epsilon, exit_code_for,
    load_dataset, solver_config_from, threads_from
)
from fairwasp.reporting import RunManifest, fairness_metrics, manifest_path, write_manifest
from fairwasp.solver.pipeline import prepare, solve_problem
from fairwasp.solver.recover import WeightVector, write_weights_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="Compute fair integer sample weights")
    add_dataset_args(parser)
    add_cost_args(parser)
    add_solver_args(parser)
    parser.add_argument("--no-dedup", dest="dedup", action="store_const", const=False, default=None,
                        help="Keep every constraint row for binary outcomes")
    parser.add_argument("--out", required=True, help="Weights CSV to write")
    parser.add_argument("--json", action="store_true", help="Print the solver report as JSON")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    epsilon = check_epsilon(args.epsilon)
    cfg = solver_config_from(args)
    ds = load_dataset(args)
    problem = prepare(
        ds,
        standardize_features=args.standardize,
        metric=args.metric,
        threads=threads_from(args),
        cache_dir=args.cache_dir,
    )
    outcome = solve_problem(problem, epsilon, cfg, dedup_binary_y=args.dedup)
    report = outcome.report

    has_weights = report.status != "infeasible"
    if has_weights:
        write_weights_csv(outcome.theta, args.out)
        logger.info(f"Weights written to {args.out}")
    else:
        logger.error(f"Problem is infeasible at epsilon={epsilon}; no weights written")

    manifest = RunManifest(
        command="solve",
        input_hash=ds.content_hash(),
        n=ds.n,
        d_values=[str(v) for v in ds.d_values],
        y_values=[str(v) for v in ds.y_values],
        config={
            "epsilon": epsilon,
            "mode": "marginal",
            "metric": args.metric,
            "standardize": args.standardize,
            "include_d_in_features": args.include_d_in_features,
            "dedup_binary_y": args.dedup,
            "target": problem.p_y.probs.tolist(),
            "solver": cfg.model_dump(exclude={"threads"}),
        },
        status=report.status,
        objective=outcome.objective if has_weights else None,
        wasserstein=outcome.wasserstein if has_weights else None,
        report=report.model_dump(mode="json"),
        before=fairness_metrics(WeightVector.uniform(ds.n).weights, problem.gi, problem.p_y, epsilon),
        after=fairness_metrics(outcome.theta.weights, problem.gi, problem.p_y, epsilon) if has_weights else None,
        timings=outcome.timings,
    )
    write_manifest(manifest, manifest_path(args.out))

    if args.json:
        sys.stdout.write(json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2) + "\n")
    else:
        gap = "n/a" if report.rel_gap is None else f"{report.rel_gap:.3e}"
        violation = "n/a" if outcome.violation is None else f"{outcome.violation:.3e}"
        kept = int(np.count_nonzero(outcome.theta.weights)) if has_weights else 0
        sys.stdout.write(
            f"status={report.status} objective={outcome.objective:.6g} gap={gap} "
            f"violation={violation} iterations={report.iterations} kept_rows={kept}/{ds.n}\n"
        )
    return exit_code_for(report.status)
