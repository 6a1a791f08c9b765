"""Demographic-parity constraints and fairness metrics.

Constraints take the linear form A theta >= 0. Every row of A is constant on a
(d, y) group, so rows are stored as m x L group coefficients.
"""
import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from fairwasp.data.dataset import GroupIndex, MarginalY
from fairwasp.errors import DomainError, EvaluationError

logger = logging.getLogger(__name__)

UPPER = "upper"
LOWER = "lower"

# Slack allowed when deciding that a binary-outcome row is implied by another
IMPLIED_TOL = 1e-12


class RowMeta(NamedTuple):
    d: int
    y: int
    side: str


@dataclass(frozen=True, eq=False)
class ConstraintMatrix:
    """Fairness rows in group space: coeff[j] @ group_sums(theta) >= 0."""

    coeff: np.ndarray
    epsilon: float
    target: MarginalY
    row_meta: tuple

    @property
    def m(self) -> int:
        return self.coeff.shape[0]

    @property
    def L(self) -> int:
        return self.coeff.shape[1]

    def margins(self, theta, gi: GroupIndex) -> np.ndarray:
        """Row values coeff @ group_sums(theta); feasible when all >= 0."""
        return self.coeff @ gi.group_sums(theta)

    def is_satisfied(self, theta, gi: GroupIndex, tol: float = 1e-12) -> bool:
        total = float(np.sum(theta))
        return bool(np.all(self.margins(theta, gi) >= -tol * max(total, 1.0)))


def ratio_distance(p: float, q: float) -> float:
    """Symmetric probability ratio J(p, q) = max(p/q - 1, q/p - 1)."""
    if p <= 0 or q <= 0:
        raise DomainError(f"Ratio distance needs positive arguments, got ({p}, {q})")
    return max(p / q - 1.0, q / p - 1.0)


def _check_target(t: MarginalY, n_y: int, epsilon: float) -> np.ndarray:
    probs = np.asarray(t.probs, dtype=np.float64)
    if probs.shape != (n_y,):
        raise DomainError(f"Target has {probs.shape[0]} entries, expected |Y|={n_y}")
    if np.any(~np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
        raise DomainError(f"Target entries must lie in [0, 1], got {probs.tolist()}")
    if not np.isfinite(epsilon) or epsilon < 0:
        raise DomainError(f"Epsilon must be >= 0, got {epsilon}")
    return probs


def _implied_rows(t0: float, t1: float, epsilon: float) -> set:
    """Binary-outcome rows for y = 1 implied by the y = 0 rows.

    With p1 = 1 - p0, the y = 0 lower row gives p1 <= 1 - t0/(1+eps) and the
    y = 0 upper row gives p1 >= 1 - (1+eps) t0.
    """
    implied = set()
    if 1.0 - t0 / (1.0 + epsilon) <= (1.0 + epsilon) * t1 + IMPLIED_TOL:
        implied.add(UPPER)
    if 1.0 - (1.0 + epsilon) * t0 >= t1 / (1.0 + epsilon) - IMPLIED_TOL:
        implied.add(LOWER)
    return implied


def build_constraints(
    gi: GroupIndex,
    t: MarginalY,
    epsilon: float,
    dedup_binary_y: Optional[bool] = None,
) -> ConstraintMatrix:
    """Build the linear demographic-parity rows for every observed d.

    Args:
        gi: Group partition
        t: Target outcome marginal (usually p_Y)
        epsilon: Ratio tolerance
        dedup_binary_y: For binary Y, drop y = 1 rows implied by the y = 0
            rows (exactly half of them when epsilon = 0). Defaults to on
            when |Y| = 2.

    Returns:
        ConstraintMatrix with rows ordered by (d, y, upper/lower)
    """
    probs = _check_target(t, gi.n_y, epsilon)
    if dedup_binary_y is None:
        dedup_binary_y = gi.n_y == 2

    implied = set()
    if dedup_binary_y and gi.n_y == 2:
        implied = _implied_rows(probs[0], probs[1], epsilon)

    rows: List[np.ndarray] = []
    meta: List[RowMeta] = []
    for d in gi.observed_d():
        in_d = (gi.group_d == d).astype(np.float64)
        for y in range(gi.n_y):
            in_dy = in_d * (gi.group_y == y)
            for side in (UPPER, LOWER):
                if y == 1 and side in implied:
                    continue
                if side == UPPER:
                    rows.append((1.0 + epsilon) * probs[y] * in_d - in_dy)
                else:
                    rows.append(in_dy - probs[y] / (1.0 + epsilon) * in_d)
                meta.append(RowMeta(int(d), y, side))

    coeff = np.vstack(rows) if rows else np.zeros((0, gi.L))
    coeff.flags.writeable = False
    logger.debug(f"Built {coeff.shape[0]} fairness rows over {gi.L} groups (eps={epsilon})")
    return ConstraintMatrix(coeff=coeff, epsilon=float(epsilon), target=t, row_meta=tuple(meta))


def conditional_table(theta, gi: GroupIndex, skip_empty: bool = False) -> np.ndarray:
    """p_theta(y | d) as an |D| x |Y| array.

    Rows of unobserved d are NaN; so are rows of d with zero total weight
    when skip_empty is set (otherwise those raise EvaluationError).
    """
    sums = gi.group_sums(theta)
    table = np.full((gi.n_d, gi.n_y), np.nan)
    for d in gi.observed_d():
        in_d = gi.group_d == d
        total = sums[in_d].sum()
        if total <= 0:
            if skip_empty:
                continue
            raise EvaluationError(f"Conditional undefined: protected class {d} has zero total weight")
        table[d] = 0.0
        for l in np.flatnonzero(in_d):
            table[d, gi.group_y[l]] = sums[l] / total
    return table


def fairness_violation(theta, gi: GroupIndex, t: MarginalY, epsilon: float) -> float:
    """Largest overshoot of p_theta(y|d) outside [t_y/(1+eps), (1+eps) t_y]."""
    probs = np.asarray(t.probs, dtype=np.float64)
    table = conditional_table(theta, gi)[gi.observed_d()]
    below = probs / (1.0 + epsilon) - table
    above = table - (1.0 + epsilon) * probs
    return float(max(0.0, below.max(), above.max()))


def _pair_ratio(p: float, q: float) -> float:
    if p == 0 and q == 0:
        return 0.0
    if p == 0 or q == 0:
        return float('inf')
    return ratio_distance(p, q)


def _populated(table: np.ndarray) -> np.ndarray:
    return table[~np.isnan(table).any(axis=1)]


def pairwise_violation(theta, gi: GroupIndex) -> float:
    """Largest J(p_theta(y|d1), p_theta(y|d2)) over y and pairs of d.

    A zero conditional against a positive one counts as +inf; two zeros
    count as equal. An observed protected class left with zero total weight
    has no conditional at all and also counts as +inf.
    """
    table = conditional_table(theta, gi, skip_empty=True)[gi.observed_d()]
    if np.isnan(table).any():
        return float('inf')
    worst = 0.0
    for a in range(table.shape[0]):
        for b in range(a + 1, table.shape[0]):
            for y in range(table.shape[1]):
                worst = max(worst, _pair_ratio(table[a, y], table[b, y]))
    return worst


def demographic_disparity(theta, gi: GroupIndex) -> float:
    """Largest absolute gap in p_theta(y|d) between two populated protected classes."""
    table = _populated(conditional_table(theta, gi, skip_empty=True))
    if table.shape[0] < 2:
        return 0.0
    return float((table.max(axis=0) - table.min(axis=0)).max())
