"""Transport costs compressed to row-by-group minima.

Costs are produced one block of rows at a time and reduced immediately, so the
n x n cost matrix is never held in memory; only the n x L minima and their
argmin columns are kept.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from fairwasp.config import COST_METRIC, default_threads
from fairwasp.data.dataset import Dataset, GroupIndex
from fairwasp.errors import ConfigurationError, UsageError

logger = logging.getLogger(__name__)

METRICS = ("euclidean", "sqeuclidean", "cityblock")

# Target number of cost entries per block
BLOCK_ENTRIES = 1 << 20


@dataclass(frozen=True, eq=False)
class CompressedCost:
    """Per-row, per-group cost minima with the attaining column indices."""

    row_group_min: np.ndarray
    row_group_argmin: np.ndarray
    metric: str = "euclidean"

    @property
    def n(self) -> int:
        return self.row_group_min.shape[0]

    @property
    def L(self) -> int:
        return self.row_group_min.shape[1]


def check_metric(metric: str) -> str:
    if metric not in METRICS:
        raise ConfigurationError(f"Unknown cost metric '{metric}'; expected one of {METRICS}")
    return metric


def pair_cost(ds: Dataset, i: int, j: int, metric: str = COST_METRIC) -> float:
    """Cost between samples i and j."""
    check_metric(metric)
    for index in (i, j):
        if not 0 <= index < ds.n:
            raise UsageError(f"Sample index {index} out of range for n={ds.n}")
    return float(cdist(ds.features[i:i + 1], ds.features[j:j + 1], metric=metric)[0, 0])


def _reduce_block(ds: Dataset, gi: GroupIndex, start: int, stop: int, metric: str,
                  out_min: np.ndarray, out_argmin: np.ndarray) -> None:
    costs = cdist(ds.features[start:stop], ds.features, metric=metric)
    for l, members in enumerate(gi.groups):
        sub = costs[:, members]
        # members are ascending, so argmin's first hit is the smallest column
        pos = np.argmin(sub, axis=1)
        out_argmin[start:stop, l] = members[pos]
        out_min[start:stop, l] = sub[np.arange(stop - start), pos]


def compress(ds: Dataset, gi: GroupIndex, metric: str = COST_METRIC,
             threads: Optional[int] = None) -> CompressedCost:
    """Compute row-by-group cost minima without materializing all costs.

    Args:
        ds: Dataset (standardized by the caller)
        gi: Group partition of ds
        metric: euclidean, sqeuclidean or cityblock
        threads: Worker threads; defaults to the configured count

    Returns:
        CompressedCost with n x L minima and argmins
    """
    check_metric(metric)
    if gi.n != ds.n:
        raise UsageError(f"GroupIndex covers {gi.n} samples, dataset has {ds.n}")

    n, L = ds.n, gi.L
    out_min = np.empty((n, L), dtype=np.float64)
    out_argmin = np.empty((n, L), dtype=np.int64)
    block = max(1, BLOCK_ENTRIES // max(n, 1))
    bounds = [(start, min(start + block, n)) for start in range(0, n, block)]
    workers = max(1, min(threads or default_threads(), len(bounds)))

    started = time.perf_counter()
    if workers == 1:
        for start, stop in bounds:
            _reduce_block(ds, gi, start, stop, metric, out_min, out_argmin)
    else:
        # blocks write disjoint row ranges
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_reduce_block, ds, gi, start, stop, metric, out_min, out_argmin)
                for start, stop in bounds
            ]
            for future in futures:
                future.result()
    elapsed = time.perf_counter() - started
    logger.info(f"Compressed costs n={n} L={L} metric={metric} in {elapsed:.3f}s "
                f"({len(bounds)} blocks, {workers} threads)")

    out_min.flags.writeable = False
    out_argmin.flags.writeable = False
    return CompressedCost(row_group_min=out_min, row_group_argmin=out_argmin, metric=metric)
