"""Analytic-center cutting-plane method for min F(lambda) over lambda >= 0.

Each iteration queries the separation oracle at the analytic center of the
current localization set {lambda : G lambda <= b}, which starts as the box
[0, R]^m, and adds the returned cut through the query point. The best dual
bound is max_k -F(lambda_k); the best primal bound is the cheapest transport
plan seen whose weights satisfy every fairness row.

Before cutting, a small LP over group sums finds the largest margin s with
coeff @ N >= s for some N >= 0 summing to n. A negative margin proves the
fairness rows have no solution at all; a positive one bounds sum(lambda*) by
n max(C) / s, which sizes the box.
"""
import logging
import math
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import linprog

from fairwasp.config import (
    DEFAULT_GAP_TOL, DEFAULT_MAX_ITERS, DEFAULT_LAMBDA_MAX, DEFAULT_NEWTON_TOL,
    DEFAULT_NEWTON_MAX, DEFAULT_CUT_DROP, DEFAULT_MAX_RESTARTS, FEASIBILITY_TOL,
    COMPLETION, COMPLETION_TIME_LIMIT, COMPLETION_MAX_VARS
)
from fairwasp.errors import FairwaspError
from fairwasp.solver.cost import CompressedCost
from fairwasp.solver.dual import separation_oracle
from fairwasp.solver.fairness import ConstraintMatrix

logger = logging.getLogger(__name__)

# Backtracking line search parameters
LS_ALPHA = 0.25
LS_BETA = 0.5

# Box faces within this fraction of R count as active
BOX_ACTIVE_FRACTION = 0.99

MIN_STEP = 1e-20

# Margins below -MARGIN_INFEASIBLE_TOL * n certify that no weights satisfy the rows
MARGIN_INFEASIBLE_TOL = 1e-7

Status = Literal["converged", "converged-with-ties", "iteration-limit", "numerical-failure", "infeasible"]


class NumericalFailure(FairwaspError):
    """The analytic-center subproblem broke down."""
    pass


class SolverConfig(BaseModel):
    """Tolerances and limits for the cutting-plane solver."""

    model_config = ConfigDict(frozen=True)

    gap_tol: float = Field(DEFAULT_GAP_TOL, gt=0)
    max_iters: int = Field(DEFAULT_MAX_ITERS, ge=1)
    lambda_max: float = Field(DEFAULT_LAMBDA_MAX, gt=0)
    newton_tol: float = Field(DEFAULT_NEWTON_TOL, gt=0)
    newton_max: int = Field(DEFAULT_NEWTON_MAX, ge=1)
    cut_drop_threshold: Optional[int] = Field(DEFAULT_CUT_DROP, ge=2)
    max_restarts: int = Field(DEFAULT_MAX_RESTARTS, ge=0)
    feasibility_tol: float = Field(FEASIBILITY_TOL, ge=0)
    completion: bool = COMPLETION
    completion_time_limit: float = Field(COMPLETION_TIME_LIMIT, gt=0)
    completion_max_vars: int = Field(COMPLETION_MAX_VARS, ge=1)
    threads: int = Field(1, ge=1)


class SolverReport(BaseModel):
    """Outcome of a solve.

    best_dual is the bound from the dual function and never exceeds the
    relaxation optimum; integer_bound, when set by the integer completion,
    is a lower bound on the best integer plan and may be larger.
    """

    model_config = ConfigDict(frozen=True)

    status: Status
    lambda_star: List[float]
    best_dual: Optional[float]
    best_primal: Optional[float]
    rel_gap: Optional[float]
    primal_lambda: Optional[List[float]] = None
    iterations: int
    restarts: int = 0
    n_cuts: int = 0
    lambda_box: float
    slater_margin: Optional[float] = None
    tie_count: int = 0
    integer_bound: Optional[float] = None
    completion: Optional[str] = None
    fixed_rows: int = 0
    history: List[Dict[str, Any]] = Field(default_factory=list, exclude=True)

    @property
    def has_primal(self) -> bool:
        return self.best_primal is not None


def relative_gap(primal: float, dual: float) -> float:
    """|p - d| / (1 + |p| + |d|); infinite until both bounds are finite."""
    if not (math.isfinite(primal) and math.isfinite(dual)):
        return math.inf
    return abs(primal - dual) / (1.0 + abs(primal) + abs(dual))


class CutSet:
    """Localization set {lambda : G lambda <= b}; the first 2m rows are the box."""

    def __init__(self, m: int, radius: float):
        self.m = m
        self.radius = radius
        eye = np.eye(m)
        self.G = np.vstack([-eye, eye])
        self.b = np.concatenate([np.zeros(m), np.full(m, radius)])

    @property
    def n_box(self) -> int:
        return 2 * self.m

    def __len__(self) -> int:
        return self.G.shape[0]

    def add(self, g: np.ndarray, rhs: float) -> None:
        self.G = np.vstack([self.G, g[None, :]])
        self.b = np.append(self.b, rhs)

    def add_through(self, g: np.ndarray, point: np.ndarray) -> None:
        """Add g @ lambda <= g @ point with g scaled to unit length."""
        norm = float(np.linalg.norm(g))
        unit = g / norm
        self.add(unit, float(unit @ point))

    def slacks(self, lam: np.ndarray) -> np.ndarray:
        return self.b - self.G @ lam

    def barrier(self, lam: np.ndarray) -> float:
        """-sum log(slack); +inf outside the interior."""
        s = self.slacks(lam)
        if np.any(s <= 0):
            return math.inf
        return float(-np.log(s).sum())

    def drop(self, center: np.ndarray, keep: int) -> int:
        """Keep the box and the `keep` cuts with smallest normalized slack."""
        extra = len(self) - self.n_box
        if extra <= keep:
            return 0
        s = self.slacks(center)
        H = (self.G / s[:, None] ** 2).T @ self.G
        try:
            Hinv = np.linalg.inv(H)
        except np.linalg.LinAlgError:
            return 0
        cuts = self.G[self.n_box:]
        spread = np.sqrt(np.maximum(np.einsum('ij,jk,ik->i', cuts, Hinv, cuts), 1e-300))
        score = s[self.n_box:] / spread
        kept = np.sort(np.argsort(score, kind='stable')[:keep]) + self.n_box
        rows = np.concatenate([np.arange(self.n_box), kept])
        self.G = self.G[rows]
        self.b = self.b[rows]
        return extra - keep


def _interior_point(cuts: CutSet) -> np.ndarray:
    """Chebyshev center of the localization set via a small LP."""
    norms = np.linalg.norm(cuts.G, axis=1)
    m = cuts.m
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A = np.hstack([cuts.G, norms[:, None]])
    result = linprog(c, A_ub=A, b_ub=cuts.b, bounds=[(None, None)] * m + [(0, None)], method='highs')
    if result.status != 0 or result.x[-1] <= 1e-12 * max(cuts.radius, 1.0):
        raise NumericalFailure("Localization set has no interior")
    return result.x[:m]


def _newton_step(grad: np.ndarray, H: np.ndarray, s: np.ndarray):
    try:
        step = -np.linalg.solve(H, grad)
        decrement = float(-grad @ step)
        if decrement < 0 or not np.isfinite(decrement):
            raise np.linalg.LinAlgError("Hessian not positive definite")
    except np.linalg.LinAlgError:
        # scaled gradient step stays inside the smallest slack
        norm = max(float(np.linalg.norm(grad)), 1e-300)
        step = -grad / norm * float(s.min())
        decrement = norm * float(s.min())
    return step, decrement


def analytic_center(cuts: CutSet, warm_start, newton_tol: float = DEFAULT_NEWTON_TOL,
                    newton_max: int = DEFAULT_NEWTON_MAX) -> np.ndarray:
    """Maximize sum log(b - G lambda) with damped Newton steps.

    Once half the squared Newton decrement is below newton_tol, one more full
    Newton step is taken if it lowers the barrier. When the line search stalls
    or newton_max is reached, the current iterate is returned: it has the
    lowest barrier seen and is strictly interior, so its cut is still valid.

    Args:
        cuts: Localization set
        warm_start: Starting point; replaced by a Chebyshev center when not
            strictly feasible
        newton_tol: Stopping threshold on half the squared decrement
        newton_max: Newton iteration limit

    Returns:
        The (possibly inexact) analytic center

    Raises:
        NumericalFailure: The set has no interior or the iterate is not finite
    """
    x = np.asarray(warm_start, dtype=np.float64).copy()
    if cuts.m == 0:
        return x
    if not np.all(np.isfinite(x)) or np.any(cuts.slacks(x) <= 0):
        logger.debug("Warm start not strictly feasible, computing interior point")
        x = _interior_point(cuts)

    fx = cuts.barrier(x)
    if not math.isfinite(fx):
        raise NumericalFailure("Barrier is not finite at the starting point")
    for _ in range(newton_max):
        s = cuts.slacks(x)
        grad = cuts.G.T @ (1.0 / s)
        H = (cuts.G / s[:, None] ** 2).T @ cuts.G
        step, decrement = _newton_step(grad, H, s)
        if decrement / 2.0 <= newton_tol:
            full = x + step
            return full if cuts.barrier(full) <= fx else x

        t = 1.0
        slope = float(grad @ step)
        while np.any(cuts.slacks(x + t * step) <= 0):
            t *= LS_BETA
            if t < MIN_STEP:
                logger.debug(f"Line search could not stay interior (decrement {decrement:.3e})")
                return x
        while cuts.barrier(x + t * step) > fx + LS_ALPHA * t * slope:
            t *= LS_BETA
            if t < MIN_STEP:
                logger.debug(f"Newton stalled at decrement {decrement:.3e}; using current iterate")
                return x
        x = x + t * step
        fx = cuts.barrier(x)

    logger.debug(f"Analytic center inexact after {newton_max} Newton steps")
    return x


def _nudge(cuts: CutSet, center: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Move off a cut through `center` into the strict interior."""
    direction = -g / np.linalg.norm(g)
    s = cuts.slacks(center)
    rate = cuts.G @ direction
    limits = s[rate > 0] / rate[rate > 0]
    step = 0.5 * limits.min() if limits.size else cuts.radius * 1e-3
    return center + step * direction


def _primal_upper_bound(cc: CompressedCost) -> float:
    """Cost of the most expensive plan; any feasible solution costs less."""
    return float(cc.row_group_min.max(axis=1).sum())


def slater_margin(cc: CompressedCost, cm: ConstraintMatrix) -> float:
    """Largest s with coeff @ N >= s for real group sums N >= 0, sum(N) = n.

    Every group is nonempty, so these N are exactly the group sums of
    fractional weights. A negative value means no weights meet the rows.
    """
    if cm.m == 0:
        return math.inf
    L = cm.L
    c = np.zeros(L + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-cm.coeff, np.ones((cm.m, 1))])
    A_eq = np.concatenate([np.ones(L), [0.0]])[None, :]
    result = linprog(c, A_ub=A_ub, b_ub=np.zeros(cm.m), A_eq=A_eq, b_eq=[float(cc.n)],
                     bounds=[(0, None)] * L + [(None, None)], method='highs')
    if result.status != 0:
        raise NumericalFailure(f"Margin LP failed: {result.message}")
    return float(result.x[-1])


def box_radius(cc: CompressedCost, cfg: SolverConfig, margin: float) -> float:
    """Initial R: the configured scale, shrunk by the margin bound when it is smaller.

    With F(0) <= 0 and a margin s > 0, F(lambda) >= s sum(lambda) - n max(C),
    so every minimizer has sum(lambda) <= n max(C) / s.
    """
    top = float(cc.row_group_min.max())
    radius = cfg.lambda_max * (1.0 + top)
    if math.isfinite(margin) and margin > 0:
        radius = min(radius, max(2.0 * cc.n * top / margin, 1.0))
    return radius


def _run(cc: CompressedCost, cm: ConstraintMatrix, cfg: SolverConfig, radius: float,
         iteration_offset: int) -> Dict[str, Any]:
    m = cm.m
    cuts = CutSet(m, radius)
    center = np.full(m, radius / 2.0)
    upper = _primal_upper_bound(cc)
    margin_tol = cfg.feasibility_tol * cc.n

    state: Dict[str, Any] = {
        "best_dual": -math.inf, "best_lambda": np.zeros(m),
        "best_primal": math.inf, "primal_lambda": None,
        "status": "iteration-limit", "iterations": 0, "history": [],
    }
    warm = center
    for k in range(cfg.max_iters):
        state["iterations"] = k + 1
        try:
            center = analytic_center(cuts, warm, cfg.newton_tol, cfg.newton_max)
        except NumericalFailure as e:
            logger.warning(f"Analytic center failed at iteration {k + 1}: {e}")
            state["status"] = "numerical-failure"
            break

        cut = separation_oracle(center, cc, cm, threads=cfg.threads)
        if cut.value is None:
            cuts.add_through(cut.g, center)
            warm = _nudge(cuts, center, cut.g)
            continue

        evaluation = cut.evaluation
        dual = -evaluation.value
        if dual > state["best_dual"]:
            state["best_dual"] = dual
            state["best_lambda"] = center.copy()
        # subgradient = A @ theta for the candidate plan
        if np.all(evaluation.subgradient >= -margin_tol) and evaluation.primal_objective < state["best_primal"]:
            state["best_primal"] = evaluation.primal_objective
            state["primal_lambda"] = center.copy()

        gap = relative_gap(state["best_primal"], state["best_dual"])
        record = {
            "iteration": iteration_offset + k + 1, "F": evaluation.value,
            "best_dual": state["best_dual"], "best_primal": state["best_primal"],
            "rel_gap": gap, "cuts": len(cuts), "barrier": cuts.barrier(center),
            "ties": evaluation.tie_count,
        }
        state["history"].append(record)
        logger.info(
            f"iter {record['iteration']:4d}  F={evaluation.value:.6e}  "
            f"dual={state['best_dual']:.6e}  primal={state['best_primal']:.6e}  "
            f"gap={gap:.3e}  cuts={len(cuts)}"
        )

        if gap <= cfg.gap_tol:
            state["status"] = "converged"
            break
        if state["best_dual"] > upper + 1e-9 * (1.0 + upper):
            logger.warning(f"Dual bound {state['best_dual']:.6e} exceeds every plan cost {upper:.6e}: infeasible")
            state["status"] = "infeasible"
            break
        if not np.any(cut.g):
            # zero subgradient at lambda >= 0 is optimal; nothing left to cut
            state["status"] = "numerical-failure" if state["primal_lambda"] is None else "converged"
            break

        cuts.add_through(cut.g, center)
        if cfg.cut_drop_threshold and len(cuts) - cuts.n_box > cfg.cut_drop_threshold * m:
            dropped = cuts.drop(center, keep=(cfg.cut_drop_threshold * m) // 2)
            logger.debug(f"Dropped {dropped} cuts")
        warm = _nudge(cuts, center, cut.g)

    state["n_cuts"] = len(cuts)
    return state


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def solve(cc: CompressedCost, cm: ConstraintMatrix, cfg: Optional[SolverConfig] = None) -> SolverReport:
    """Minimize F over lambda >= 0 and certify the duality gap.

    Infeasible is reported only with a certificate: a negative margin LP, or
    a dual bound above the cost of every plan. A breakdown of the centering
    step is reported as numerical-failure.

    Args:
        cc: Compressed costs
        cm: Fairness constraint rows
        cfg: Solver configuration

    Returns:
        SolverReport; lambda_star is the multiplier with the best dual value
    """
    cfg = cfg or SolverConfig()
    try:
        margin = slater_margin(cc, cm)
    except NumericalFailure as e:
        logger.warning(f"{e}; using the configured box")
        margin = math.nan
    radius = box_radius(cc, cfg, margin)
    if margin < -MARGIN_INFEASIBLE_TOL * cc.n:
        logger.warning(f"Fairness rows have margin {margin:.6e} < 0 for every weight vector: infeasible")
        return SolverReport(
            status="infeasible", lambda_star=[0.0] * cm.m, best_dual=None, best_primal=None,
            rel_gap=None, iterations=0, lambda_box=radius, slater_margin=_finite_or_none(margin),
        )
    logger.debug(f"Margin {margin:.6e}, initial box R={radius:.6e}")

    total_iterations = 0
    restarts = 0
    while True:
        state = _run(cc, cm, cfg, radius, total_iterations)
        total_iterations += state["iterations"]
        touching = bool(np.any(state["best_lambda"] >= BOX_ACTIVE_FRACTION * radius))
        retry = state["status"] in ("iteration-limit", "numerical-failure")
        if touching and retry and restarts < cfg.max_restarts:
            restarts += 1
            radius *= 2.0
            logger.warning(f"Multipliers at the box boundary; restarting with R={radius:.3e} "
                           f"(restart {restarts}/{cfg.max_restarts})")
            continue
        if touching:
            logger.warning("Best multipliers touch the box boundary; R may be too small")
        break

    best_primal = state["best_primal"]
    best_dual = state["best_dual"]
    gap = relative_gap(best_primal, best_dual)
    report = SolverReport(
        status=state["status"],
        lambda_star=state["best_lambda"].tolist(),
        best_dual=_finite_or_none(best_dual),
        best_primal=_finite_or_none(best_primal),
        rel_gap=_finite_or_none(gap),
        primal_lambda=None if state["primal_lambda"] is None else state["primal_lambda"].tolist(),
        iterations=total_iterations,
        restarts=restarts,
        n_cuts=state["n_cuts"],
        lambda_box=radius,
        slater_margin=_finite_or_none(margin),
        history=state["history"],
    )
    logger.info(f"Solve finished: status={report.status} iterations={report.iterations} "
                f"dual={best_dual:.6e} primal={best_primal:.6e} gap={gap:.3e}")
    return report
