"""Exact integer completion when the dual gap stays open.

The dual bound can only reach the linear relaxation. On small or degenerate
instances the best integer plan sits strictly above it, so the cutting-plane
loop stops at the iteration limit with a gap it can never close. This step
solves the compressed assignment problem

    min sum rgm[i, l] x[i, l]
    s.t. sum_l x[i, l] = 1 for each row i,  coeff @ N(x) >= 0,  x binary

with N_l(x) = sum_i x[i, l]. It has the same optimum as the full integer
problem: inside a group the cheapest column is always the stored argmin.

Rows are fixed by reduced cost first. With s[i, l] = v_l(lambda) - rgm[i, l]
and delta[i, l] = max_l' s[i, l'] - s[i, l] >= 0, every plan meeting the rows
costs at least -F(lambda) + sum_i delta[i, g_i]. A plan cheaper than the
incumbent therefore only uses options with delta <= incumbent + F(lambda).
"""
import logging
import math
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix

from fairwasp.solver.accpm import SolverConfig, SolverReport, relative_gap
from fairwasp.solver.cost import CompressedCost
from fairwasp.solver.fairness import ConstraintMatrix

logger = logging.getLogger(__name__)

# Absolute slack, relative to 1 + |incumbent|, when filtering options by reduced cost
FIXING_TOL = 1e-9

# Relative gap handed to the MIP solver
MIP_REL_GAP = 1e-7

# scipy milp status codes
MILP_OPTIMAL = 0
MILP_INFEASIBLE = 2


class Completion(NamedTuple):
    """Result of the integer step.

    status is "optimal", "infeasible" (no plan meets the rows), "limit"
    (stopped early) or "skipped" (too many free options). chosen_group is
    None when the incumbent from the dual loop is kept.
    """

    status: str
    chosen_group: Optional[np.ndarray]
    objective: Optional[float]
    lower_bound: Optional[float]
    fixed_rows: int
    variables: int


def reduced_costs(lam, cc: CompressedCost, cm: ConstraintMatrix) -> np.ndarray:
    """delta[i, l] = max_l' s[i, l'] - s[i, l] for s = v(lambda) - rgm."""
    v = np.asarray(lam, dtype=np.float64) @ cm.coeff
    scores = v[None, :] - cc.row_group_min
    return scores.max(axis=1, keepdims=True) - scores


def plan_cost(cc: CompressedCost, chosen_group: np.ndarray) -> float:
    return float(cc.row_group_min[np.arange(cc.n), chosen_group].sum())


def plan_weights(cc: CompressedCost, chosen_group: np.ndarray) -> np.ndarray:
    """Column arrival counts when row i moves to its nearest member of group chosen_group[i]."""
    columns = cc.row_group_argmin[np.arange(cc.n), chosen_group]
    return np.bincount(columns, minlength=cc.n)


def _meets_rows(cm: ConstraintMatrix, chosen_group: np.ndarray, margin_tol: float) -> bool:
    counts = np.bincount(chosen_group, minlength=cm.L)
    return bool(np.all(cm.coeff @ counts >= -margin_tol))


def complete(cc: CompressedCost, cm: ConstraintMatrix, report: SolverReport, cfg: SolverConfig) -> Completion:
    """Solve the compressed integer problem around the dual solution.

    Args:
        cc: Compressed costs
        cm: Fairness constraint rows
        report: Cutting-plane report; lambda_star and best_dual drive the
            fixing, best_primal is the incumbent
        cfg: Solver configuration (feasibility_tol, completion limits)

    Returns:
        Completion
    """
    n, L = cc.n, cc.L
    margin_tol = cfg.feasibility_tol * n
    lam = np.asarray(report.lambda_star, dtype=np.float64)
    incumbent = report.best_primal
    delta = reduced_costs(lam, cc, cm)

    if incumbent is not None and report.best_dual is not None:
        # incumbent rows may be short by margin_tol, which lambda prices at most lam.sum() * margin_tol
        slack = FIXING_TOL * (1.0 + abs(incumbent)) + float(lam.sum()) * margin_tol
        allowed = delta <= (incumbent - report.best_dual) + slack
    else:
        allowed = np.ones((n, L), dtype=bool)

    fixed = allowed.sum(axis=1) == 1
    base_group = np.argmax(allowed, axis=1)
    fixed_rows = int(fixed.sum())
    base_counts = np.bincount(base_group[fixed], minlength=L)
    base_cost = float(cc.row_group_min[fixed, base_group[fixed]].sum())

    free_rows = np.flatnonzero(~fixed)
    rows, groups = np.nonzero(allowed[free_rows])
    k = rows.size
    logger.info(f"Integer completion: {fixed_rows}/{n} rows fixed, {k} free options")

    def keep_incumbent(status: str, bound: Optional[float]) -> Completion:
        return Completion(status, None, incumbent, bound, fixed_rows, k)

    if k > cfg.completion_max_vars:
        logger.warning(f"Integer completion skipped: {k} options exceed {cfg.completion_max_vars}")
        return keep_incumbent("skipped", None)

    if k == 0:
        if _meets_rows(cm, base_group, margin_tol):
            cost = plan_cost(cc, base_group)
            if incumbent is None or cost < incumbent:
                return Completion("optimal", base_group, cost, cost, fixed_rows, 0)
            return keep_incumbent("optimal", incumbent)
        if incumbent is None:
            return Completion("infeasible", None, None, None, fixed_rows, 0)
        return keep_incumbent("optimal", incumbent)

    assign = csr_matrix((np.ones(k), (rows, np.arange(k))), shape=(free_rows.size, k))
    constraints = [
        LinearConstraint(assign, 1.0, 1.0),
        LinearConstraint(cm.coeff[:, groups], -margin_tol - cm.coeff @ base_counts, np.inf),
    ]
    result = milp(
        c=cc.row_group_min[free_rows[rows], groups],
        constraints=constraints,
        integrality=np.ones(k, dtype=int),
        bounds=Bounds(lb=0, ub=1),
        options={"time_limit": cfg.completion_time_limit, "mip_rel_gap": MIP_REL_GAP},
    )
    logger.debug(f"milp status {result.status}: {result.message}")

    if result.status == MILP_INFEASIBLE:
        if incumbent is None and fixed_rows == 0:
            logger.warning("Integer completion proves that no integer weights meet the rows")
            return Completion("infeasible", None, None, None, fixed_rows, k)
        # nothing beats the incumbent
        return keep_incumbent("optimal", incumbent)

    dual_bound = getattr(result, "mip_dual_bound", None)
    if dual_bound is None or not math.isfinite(dual_bound):
        dual_bound = result.fun if result.status == MILP_OPTIMAL else None
    lower = None if dual_bound is None else float(dual_bound) + base_cost
    if lower is not None and incumbent is not None:
        lower = min(lower, incumbent)
    status = "optimal" if result.status == MILP_OPTIMAL else "limit"

    if result.x is None:
        logger.warning(f"Integer completion found no plan: {result.message}")
        return keep_incumbent(status, lower)

    chosen = base_group.copy()
    pick = result.x > 0.5
    chosen[free_rows[rows[pick]]] = groups[pick]
    if not _meets_rows(cm, chosen, margin_tol):
        logger.warning("Integer completion plan misses a fairness row after rounding; discarded")
        return keep_incumbent("limit", lower)

    cost = plan_cost(cc, chosen)
    if incumbent is not None and cost >= incumbent:
        return keep_incumbent(status, lower)
    if lower is not None:
        lower = min(lower, cost)
    return Completion(status, chosen, cost, lower, fixed_rows, k)


def apply_completion(report: SolverReport, completion: Completion, gap_tol: float) -> SolverReport:
    """Report after the integer step; the gap is measured against the stronger lower bound."""
    update = {"completion": completion.status, "fixed_rows": completion.fixed_rows}
    if completion.status == "infeasible":
        update["status"] = "infeasible"
        return report.model_copy(update=update)
    if completion.objective is None:
        return report.model_copy(update=update)

    bounds = [b for b in (report.best_dual, completion.lower_bound) if b is not None]
    bound = max(bounds) if bounds else -math.inf
    gap = relative_gap(completion.objective, bound)
    update.update(
        best_primal=completion.objective,
        integer_bound=completion.lower_bound,
        rel_gap=gap if math.isfinite(gap) else None,
    )
    if gap <= gap_tol:
        update["status"] = "converged"
    return report.model_copy(update=update)
