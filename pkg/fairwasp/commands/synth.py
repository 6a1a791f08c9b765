"""`fairwasp synth`: write a synthetic benchmark dataset."""
import argparse
import logging

from fairwasp.commands import EXIT_OK
from fairwasp.data.synthetic import generate_synthetic, write_dataset_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth", help="Generate the synthetic scaling dataset")
    parser.add_argument("--n", type=int, required=True, help="Number of samples")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed")
    parser.add_argument("--out", required=True, help="Output CSV (columns x1,x2,d,y)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    ds = generate_synthetic(args.n, args.seed)
    path = write_dataset_csv(ds, args.out)
    logger.info(f"Wrote {ds.n} synthetic rows to {path}")
    return EXIT_OK
