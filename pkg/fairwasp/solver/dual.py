"""Dual function F(lambda) = max_P <sum_j lambda_j e a_j^T - C, P>.

Row i of the maximizing plan puts its unit mass on the column that maximizes
v_l(lambda) - C_ik over groups l and columns k in G_l; within a group the best
column is the precomputed argmin, so each evaluation scans n x L entries.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from fairwasp.errors import UsageError
from fairwasp.solver.cost import CompressedCost
from fairwasp.solver.fairness import ConstraintMatrix

logger = logging.getLogger(__name__)

# Rows per worker below which threading is not worth it
MIN_ROWS_PER_THREAD = 50000

# Relative tolerance for counting a row maximum as tied
TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DualEvaluation:
    """F(lambda), a subgradient, and the primal plan behind them."""

    value: float
    subgradient: np.ndarray
    chosen_group: np.ndarray
    column_counts: np.ndarray
    primal_objective: float
    tie_count: int


class Cut(NamedTuple):
    """Separating hyperplane g; value/evaluation are None for feasibility cuts."""

    g: np.ndarray
    value: Optional[float]
    evaluation: Optional[DualEvaluation]


def _scan(v: np.ndarray, cc: CompressedCost, start: int, stop: int):
    mins = cc.row_group_min[start:stop]
    scores = v[None, :] - mins
    chosen = np.argmax(scores, axis=1)
    rows = np.arange(stop - start)
    best = scores[rows, chosen]
    near = scores >= (best - TIE_RTOL * (1.0 + np.abs(best)))[:, None]
    ties = int(np.count_nonzero(near.sum(axis=1) > 1))
    columns = cc.row_group_argmin[start:stop][rows, chosen]
    return chosen, columns, float(best.sum()), float(mins[rows, chosen].sum()), ties


def evaluate(lam, cc: CompressedCost, cm: ConstraintMatrix, threads: int = 1) -> DualEvaluation:
    """Evaluate F and a subgradient at lambda.

    Args:
        lam: m-vector of multipliers
        cc: Compressed costs
        cm: Constraint rows in group space
        threads: Row-parallel workers (only used for large n)

    Returns:
        DualEvaluation; ties go to the smallest group index
    """
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (cm.m,):
        raise UsageError(f"lambda has shape {lam.shape}, expected ({cm.m},)")
    if cm.L != cc.L:
        raise UsageError(f"Constraint matrix has {cm.L} groups, costs have {cc.L}")
    if not np.all(np.isfinite(lam)):
        raise UsageError("lambda must be finite")

    n = cc.n
    v = lam @ cm.coeff
    workers = max(1, min(threads, n // MIN_ROWS_PER_THREAD))
    if workers == 1:
        parts = [_scan(v, cc, 0, n)]
    else:
        edges = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda k: _scan(v, cc, edges[k], edges[k + 1]), range(workers)))

    chosen = np.concatenate([p[0] for p in parts])
    columns = np.concatenate([p[1] for p in parts])
    value = sum(p[2] for p in parts)
    primal = sum(p[3] for p in parts)
    ties = sum(p[4] for p in parts)

    group_counts = np.bincount(chosen, minlength=cc.L)
    subgradient = cm.coeff @ group_counts
    column_counts = np.bincount(columns, minlength=n)
    if ties:
        logger.debug(f"Dual evaluation has {ties} tied rows")
    return DualEvaluation(
        value=float(value),
        subgradient=subgradient,
        chosen_group=chosen,
        column_counts=column_counts,
        primal_objective=float(primal),
        tie_count=ties,
    )


def separation_oracle(lam, cc: CompressedCost, cm: ConstraintMatrix, threads: int = 1) -> Cut:
    """Cut separating lambda from every minimizer of F over lambda >= 0.

    For lambda >= 0 this is a subgradient (objective cut); otherwise the
    coordinate cut -e_j for the first negative entry j.
    """
    lam = np.asarray(lam, dtype=np.float64)
    negative = np.flatnonzero(lam < 0)
    if negative.size:
        g = np.zeros_like(lam)
        g[negative[0]] = -1.0
        return Cut(g=g, value=None, evaluation=None)
    evaluation = evaluate(lam, cc, cm, threads=threads)
    return Cut(g=evaluation.subgradient, value=evaluation.value, evaluation=evaluation)
