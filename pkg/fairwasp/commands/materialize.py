"""`fairwasp materialize`: duplicate and drop rows according to weights."""
import argparse
import logging
from pathlib import Path

from fairwasp.commands import EXIT_OK, add_dataset_args, load_dataset, load_weights
from fairwasp.data.synthetic import write_dataset_csv
from fairwasp.solver.recover import materialize

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("materialize", help="Write the reweighted dataset with the input schema")
    add_dataset_args(parser)
    parser.add_argument("--weights", required=True, help="Weights CSV, or 'uniform'")
    parser.add_argument("--out", required=True, help="Output CSV")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    ds = load_dataset(args)
    theta = load_weights(args.weights, ds.n)
    result = materialize(ds, theta)
    path = write_dataset_csv(result, Path(args.out))
    dropped = int((theta.weights == 0).sum())
    logger.info(f"Materialized {result.n} rows to {path} ({dropped} input rows dropped)")
    return EXIT_OK
