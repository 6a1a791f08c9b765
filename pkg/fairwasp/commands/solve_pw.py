"""`fairwasp solve-pw`: pairwise demographic parity."""
import argparse
import json
import logging
import sys

from pydantic import ValidationError

from fairwasp.commands import (
    EXIT_OK, add_cost_args, add_dataset_args, add_solver_args, check_epsilon, exit_code_for,
    load_dataset, solver_config_from, threads_from
)
from fairwasp.config import PW_NM_MAX_EVALS, PW_RESTARTS
from fairwasp.errors import ConfigurationError
from fairwasp.reporting import RunManifest, fairness_metrics, manifest_path, write_manifest
from fairwasp.solver.pairwise import PWConfig, solve_pw
from fairwasp.solver.pipeline import prepare
from fairwasp.solver.recover import WeightVector, write_weights_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve-pw", help="Weights under pairwise parity via a search over targets")
    add_dataset_args(parser)
    add_cost_args(parser)
    add_solver_args(parser)
    parser.add_argument("--nm-max-evals", type=int, default=PW_NM_MAX_EVALS,
                        help="Nelder-Mead function evaluations per start")
    parser.add_argument("--restarts", type=int, default=PW_RESTARTS, help="Extra perturbed starting points")
    parser.add_argument("--seed", type=int, default=0, help="Seed for restart perturbations")
    parser.add_argument("--out", required=True, help="Weights CSV to write")
    parser.add_argument("--json", action="store_true", help="Print the report as JSON")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    epsilon = check_epsilon(args.epsilon)
    solver_cfg = solver_config_from(args)
    try:
        cfg = PWConfig(epsilon=epsilon, nm_max_evals=args.nm_max_evals, restarts=args.restarts, seed=args.seed)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid pairwise settings: {e}")

    ds = load_dataset(args)
    problem = prepare(
        ds,
        standardize_features=args.standardize,
        metric=args.metric,
        threads=threads_from(args),
        cache_dir=args.cache_dir,
    )
    result = solve_pw(problem, cfg, solver_cfg)
    report = result.report

    if result.theta is not None:
        write_weights_csv(result.theta, args.out)
        logger.info(f"Weights written to {args.out}")
    else:
        logger.error(f"No feasible target found at epsilon={epsilon}; no weights written")

    outcome = result.outcome
    manifest = RunManifest(
        command="solve-pw",
        input_hash=ds.content_hash(),
        n=ds.n,
        d_values=[str(v) for v in ds.d_values],
        y_values=[str(v) for v in ds.y_values],
        config={
            "epsilon": epsilon,
            "epsilon_bar": cfg.epsilon_bar,
            "mode": "pairwise",
            "metric": args.metric,
            "standardize": args.standardize,
            "include_d_in_features": args.include_d_in_features,
            "seed": args.seed,
            "pairwise": cfg.model_dump(),
            "solver": solver_cfg.model_dump(exclude={"threads"}),
        },
        status=report.status,
        objective=report.objective,
        wasserstein=outcome.wasserstein if outcome is not None else None,
        report=report.model_dump(mode="json"),
        before=fairness_metrics(WeightVector.uniform(ds.n).weights, problem.gi, problem.p_y, cfg.epsilon_bar),
        after=(fairness_metrics(result.theta.weights, problem.gi, result.t_star, cfg.epsilon_bar)
               if result.theta is not None else None),
        timings=outcome.timings if outcome is not None else dict(problem.timings),
    )
    write_manifest(manifest, manifest_path(args.out))

    if args.json:
        sys.stdout.write(json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2) + "\n")
    else:
        t_star = "n/a" if report.t_star is None else ",".join(f"{v:.6f}" for v in report.t_star)
        pairwise = "n/a" if report.pairwise_violation is None else f"{report.pairwise_violation:.3e}"
        objective = "n/a" if report.objective is None else f"{report.objective:.6g}"
        sys.stdout.write(
            f"status={report.status} objective={objective} t*={t_star} pairwise_violation={pairwise} "
            f"evaluations={report.evaluations} flagged={report.flagged}\n"
        )
    code = exit_code_for(report.status)
    if code == EXIT_OK and report.flagged:
        logger.warning("Returned weights exceed the pairwise bound")
    return code
