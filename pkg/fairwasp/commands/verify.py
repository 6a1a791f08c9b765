"""`fairwasp verify`: fairness report for a weight vector."""
import argparse
import logging
import sys

from fairwasp.commands import EXIT_OK, add_dataset_args, check_epsilon, load_dataset, load_weights, parse_target
from fairwasp.config import DEFAULT_EPSILON
from fairwasp.data.dataset import group_index, marginal_y
from fairwasp.reporting import build_verify_report
from fairwasp.solver.fairness import build_constraints

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="Report conditionals, margins and violations")
    add_dataset_args(parser)
    parser.add_argument("--weights", default="uniform", help="Weights CSV, or 'uniform'")
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="Fairness tolerance")
    parser.add_argument("--target", default=None,
                        help="Comma-separated target p(y); defaults to the unweighted data marginal")
    parser.add_argument("--all-rows", action="store_true", help="Show both rows for binary outcomes")
    parser.add_argument("--json", action="store_true", help="Print the report as JSON")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    epsilon = check_epsilon(args.epsilon)
    ds = load_dataset(args)
    gi = group_index(ds)
    theta = load_weights(args.weights, ds.n)
    target = parse_target(args.target, ds.n_y)
    if target is None:
        target = marginal_y(ds)
    cm = build_constraints(gi, target, epsilon, dedup_binary_y=False if args.all_rows else None)

    report = build_verify_report(ds, gi, theta.weights, target, cm)
    if report.violation is None:
        logger.warning("A protected class has zero total weight; violation is undefined")
    sys.stdout.write(report.to_json() if args.json else report.to_text())
    return EXIT_OK
