"""Brute-force reference solvers for small instances.

Used by the test-suite and the hidden `oracle` command to cross-check the
cutting-plane solver; never on the main solve path. Feasibility is decided in
exact rational arithmetic on integer group sums.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist

from fairwasp.data.dataset import Dataset, GroupIndex, MarginalY, group_index
from fairwasp.errors import UsageError
from fairwasp.solver.fairness import build_constraints
from fairwasp.solver.recover import WeightVector

logger = logging.getLogger(__name__)

MAX_ENUMERATE_N = 8
MAX_ASSIGNMENT_N = 200
MAX_MIP_N = 7
MAX_LP_N = 12


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Exact optimum over enumerated integer weights."""

    objective: float
    theta: Optional[WeightVector]
    feasible_count: int

    @property
    def feasible(self) -> bool:
        return self.feasible_count > 0


@dataclass(frozen=True, eq=False)
class LPResult:
    """Optimum of the real-valued relaxation."""

    objective: float
    theta: Optional[np.ndarray]
    feasible: bool


def cost_matrix(ds: Dataset, metric: str = "euclidean") -> np.ndarray:
    """Dense pairwise costs; small instances only."""
    if ds.n > MAX_ASSIGNMENT_N:
        raise UsageError(f"Dense cost matrix limited to n <= {MAX_ASSIGNMENT_N}, got {ds.n}")
    return cdist(ds.features, ds.features, metric=metric)


def _enumerate_cost(C: np.ndarray, capacity: np.ndarray) -> float:
    """Minimum assignment cost by depth-first search over rows."""
    n = C.shape[0]
    remaining = capacity.copy()
    best = [math.inf]

    def visit(row: int, partial: float) -> None:
        if partial >= best[0]:
            return
        if row == n:
            best[0] = partial
            return
        for col in np.flatnonzero(remaining):
            remaining[col] -= 1
            visit(row + 1, partial + C[row, col])
            remaining[col] += 1

    visit(0, 0.0)
    return best[0]


def _assignment_cost(C: np.ndarray, capacity: np.ndarray) -> float:
    """Minimum assignment cost with column k repeated capacity[k] times."""
    columns = np.repeat(np.arange(C.shape[1]), capacity)
    rows, cols = linear_sum_assignment(C[:, columns])
    return float(C[rows, columns[cols]].sum())


def transport_cost(ds: Dataset, theta, mode: str = "auto", metric: str = "euclidean") -> float:
    """Exact optimal transport cost from unit row masses to column masses theta.

    Args:
        ds: Dataset
        theta: Integer weights summing to n
        mode: "enumerate" (n <= 8), "assignment" (n <= 200) or "auto"
        metric: Ground cost

    Returns:
        min <C, P> over plans with P e = e and P^T e = theta
    """
    weights = np.asarray(theta.weights if isinstance(theta, WeightVector) else theta, dtype=np.int64)
    if weights.shape != (ds.n,) or int(weights.sum()) != ds.n or np.any(weights < 0):
        raise UsageError("theta must be nonnegative integers summing to n")
    if mode == "auto":
        mode = "enumerate" if ds.n <= MAX_ENUMERATE_N else "assignment"
    if mode == "enumerate":
        if ds.n > MAX_ENUMERATE_N:
            raise UsageError(f"Enumeration limited to n <= {MAX_ENUMERATE_N}, got {ds.n}")
        return _enumerate_cost(cost_matrix(ds, metric), weights)
    if mode == "assignment":
        return _assignment_cost(cost_matrix(ds, metric), weights)
    raise UsageError(f"Unknown transport mode '{mode}'")


def compositions(n: int) -> Iterator[np.ndarray]:
    """All nonnegative integer n-vectors summing to n (stars and bars)."""
    for bars in itertools.combinations(range(2 * n - 1), n - 1):
        edges = (-1,) + bars + (2 * n - 1,)
        yield np.array([edges[k + 1] - edges[k] - 1 for k in range(n)], dtype=np.int64)


def _class_sums(theta: np.ndarray, gi: GroupIndex):
    sums = gi.group_sums(theta).round().astype(np.int64)
    table = np.zeros((gi.n_d, gi.n_y), dtype=np.int64)
    for l in range(gi.L):
        table[gi.group_d[l], gi.group_y[l]] = sums[l]
    return table


def marginal_feasible(theta: np.ndarray, gi: GroupIndex, t: MarginalY, epsilon: float) -> bool:
    """Exact check of A theta >= 0 on integer group sums."""
    table = _class_sums(theta, gi)
    scale = 1 + Fraction(epsilon)
    targets = [Fraction(float(p)) for p in t.probs]
    for d in gi.observed_d():
        total = int(table[d].sum())
        for y in range(gi.n_y):
            count = int(table[d, y])
            if count > scale * targets[y] * total:
                return False
            if count * scale < targets[y] * total:
                return False
    return True


def pairwise_feasible(theta: np.ndarray, gi: GroupIndex, epsilon: float) -> bool:
    """Exact check that every pair of populated classes is within ratio epsilon."""
    table = _class_sums(theta, gi)
    scale = 1 + Fraction(epsilon)
    rows = [table[d] for d in gi.observed_d() if table[d].sum() > 0]
    for a, b in itertools.combinations(rows, 2):
        for y in range(gi.n_y):
            p = Fraction(int(a[y]), int(a.sum()))
            q = Fraction(int(b[y]), int(b.sum()))
            if p == 0 and q == 0:
                continue
            if p == 0 or q == 0 or max(p, q) > scale * min(p, q):
                return False
    return True


def _search(ds: Dataset, accept, metric: str) -> OracleResult:
    if ds.n > MAX_MIP_N:
        raise UsageError(f"Brute-force MIP limited to n <= {MAX_MIP_N}, got {ds.n}")
    C = cost_matrix(ds, metric)
    best_value = math.inf
    best_theta = None
    feasible = 0
    for theta in compositions(ds.n):
        if not accept(theta):
            continue
        feasible += 1
        value = _assignment_cost(C, theta)
        if value < best_value - 1e-12:
            best_value, best_theta = value, theta
    logger.debug(f"Brute force over n={ds.n}: {feasible} feasible weight vectors, best {best_value}")
    return OracleResult(
        objective=best_value,
        theta=None if best_theta is None else WeightVector(best_theta),
        feasible_count=feasible,
    )


def brute_mip(ds: Dataset, t: MarginalY, epsilon: float, metric: str = "euclidean") -> OracleResult:
    """Exact integer optimum under the marginal-targeted rows at (t, epsilon)."""
    gi = group_index(ds)
    return _search(ds, lambda theta: marginal_feasible(theta, gi, t, epsilon), metric)


def brute_pairwise_mip(ds: Dataset, epsilon: float, metric: str = "euclidean") -> OracleResult:
    """Exact integer optimum under the pairwise ratio bound epsilon."""
    gi = group_index(ds)
    return _search(ds, lambda theta: pairwise_feasible(theta, gi, epsilon), metric)


def count_feasible(ds: Dataset, accept) -> List[np.ndarray]:
    """Every integer weight vector accepted by `accept`."""
    if ds.n > MAX_MIP_N:
        raise UsageError(f"Enumeration limited to n <= {MAX_MIP_N}, got {ds.n}")
    return [theta for theta in compositions(ds.n) if accept(theta)]


def solve_lp(ds: Dataset, t: MarginalY, epsilon: float, metric: str = "euclidean") -> LPResult:
    """Real-valued relaxation over all n^2 plan entries, solved with HiGHS."""
    n = ds.n
    if n > MAX_LP_N:
        raise UsageError(f"Dense LP limited to n <= {MAX_LP_N}, got {n}")
    gi = group_index(ds)
    cm = build_constraints(gi, t, epsilon, dedup_binary_y=False)
    C = cost_matrix(ds, metric)

    # P is flattened row-major; theta_k = sum_i P[i, k]
    A_eq = np.kron(np.eye(n), np.ones((1, n)))
    column_coeff = cm.coeff[:, gi.group_of]
    A_ub = -np.tile(column_coeff, (1, n))
    result = linprog(
        C.ravel(),
        A_ub=A_ub if cm.m else None,
        b_ub=np.zeros(cm.m) if cm.m else None,
        A_eq=A_eq,
        b_eq=np.ones(n),
        bounds=(0, None),
        method='highs',
    )
    if result.status == 2:
        return LPResult(objective=math.inf, theta=None, feasible=False)
    if result.status != 0:
        raise UsageError(f"LP oracle failed: {result.message}")
    plan = result.x.reshape(n, n)
    return LPResult(objective=float(result.fun), theta=plan.sum(axis=0), feasible=True)
