"""`fairwasp oracle`: brute-force reference solve for debugging small inputs."""
import argparse
import json
import logging
import math
import sys

from fairwasp.commands import EXIT_INFEASIBLE, EXIT_OK, add_dataset_args, check_epsilon, load_dataset, parse_target
from fairwasp.config import COST_METRIC, DEFAULT_EPSILON
from fairwasp.data.dataset import marginal_y, standardize
from fairwasp.oracle.brute import brute_mip, brute_pairwise_mip, solve_lp
from fairwasp.solver.cost import METRICS

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("oracle", help=argparse.SUPPRESS)
    add_dataset_args(parser)
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    parser.add_argument("--target", default=None)
    parser.add_argument("--kind", choices=("mip", "pairwise", "lp"), default="mip")
    parser.add_argument("--metric", choices=METRICS, default=COST_METRIC)
    parser.add_argument("--no-standardize", dest="standardize", action="store_false", default=True)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    epsilon = check_epsilon(args.epsilon)
    ds = load_dataset(args)
    if args.standardize:
        ds = standardize(ds)
    target = parse_target(args.target, ds.n_y)
    if target is None:
        target = marginal_y(ds)

    if args.kind == "lp":
        lp = solve_lp(ds, target, epsilon, metric=args.metric)
        payload = {
            "kind": "lp",
            "feasible": lp.feasible,
            "objective": lp.objective if lp.feasible else None,
            "theta": None if lp.theta is None else lp.theta.tolist(),
        }
        feasible = lp.feasible
    else:
        if args.kind == "pairwise":
            result = brute_pairwise_mip(ds, epsilon, metric=args.metric)
        else:
            result = brute_mip(ds, target, epsilon, metric=args.metric)
        payload = {
            "kind": args.kind,
            "feasible": result.feasible,
            "feasible_count": result.feasible_count,
            "objective": result.objective if math.isfinite(result.objective) else None,
            "theta": None if result.theta is None else result.theta.weights.tolist(),
        }
        feasible = result.feasible

    payload["epsilon"] = epsilon
    payload["target"] = target.probs.tolist()
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if feasible else EXIT_INFEASIBLE
