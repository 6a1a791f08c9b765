"""Pairwise demographic parity through an outer search over the target t.

Weights meeting the marginal-targeted rows at (t, eps_bar) with
eps_bar = sqrt(1 + eps) - 1 meet the pairwise ratio bound eps, for any t.
Minimizing the inner optimum H(t) over t in [0, 1]^|Y| with Nelder-Mead
therefore gives pairwise-feasible weights of low transport cost.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field
from scipy.optimize import minimize

from fairwasp.config import PW_NM_MAX_EVALS, PW_NM_TOL, PW_RESTARTS
from fairwasp.data.dataset import Dataset, MarginalY
from fairwasp.errors import EvaluationError
from fairwasp.solver.accpm import SolverConfig, SolverReport
from fairwasp.solver.fairness import pairwise_violation
from fairwasp.solver.pipeline import Problem, SolveOutcome, prepare, solve_problem
from fairwasp.solver.recover import WeightVector

logger = logging.getLogger(__name__)

# Per-coordinate offset of the initial simplex
SIMPLEX_STEP = 0.05
# Spread of restart starting points around p_Y
RESTART_SPREAD = 0.1
PAIRWISE_TOL = 1e-6


class PWConfig(BaseModel):
    """Outer search settings for the pairwise variant."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(ge=0)
    nm_max_evals: int = Field(PW_NM_MAX_EVALS, ge=1)
    nm_tol: float = Field(PW_NM_TOL, gt=0)
    restarts: int = Field(PW_RESTARTS, ge=0)
    seed: int = 0

    @computed_field
    @property
    def epsilon_bar(self) -> float:
        return math.sqrt(1.0 + self.epsilon) - 1.0


class PWReport(BaseModel):
    """Summary of a pairwise solve."""

    status: str
    epsilon: float
    epsilon_bar: float
    t_star: Optional[List[float]]
    objective: Optional[float]
    pairwise_violation: Optional[float]
    flagged: bool
    evaluations: int
    starts: int
    inner: Optional[SolverReport] = None


@dataclass(frozen=True, eq=False)
class PWResult:
    theta: Optional[WeightVector]
    t_star: Optional[MarginalY]
    report: PWReport
    outcome: Optional[SolveOutcome]


class _Evaluator:
    """Caches inner solves by t so repeated simplex vertices cost nothing."""

    def __init__(self, problem: Problem, cfg: PWConfig, solver_cfg: SolverConfig):
        self.problem = problem
        self.cfg = cfg
        self.solver_cfg = solver_cfg
        self.cache: Dict[Tuple[float, ...], Tuple[float, SolveOutcome]] = {}
        self.evaluated: List[np.ndarray] = []

    def __call__(self, t) -> float:
        clipped = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
        key = tuple(np.round(clipped, 12).tolist())
        if key not in self.cache:
            self.evaluated.append(clipped)
            outcome = solve_problem(self.problem, self.cfg.epsilon_bar, self.solver_cfg, target=MarginalY(clipped))
            value = _h_value(outcome)
            logger.debug(f"H({np.round(clipped, 6).tolist()}) = {value}")
            self.cache[key] = (value, outcome)
        return self.cache[key][0]

    def best(self) -> Tuple[Optional[Tuple[float, ...]], float]:
        if not self.cache:
            return None, math.inf
        # ties go to the earliest evaluation, so p_Y wins among equals
        key = min(self.cache, key=lambda k: self.cache[k][0])
        return key, self.cache[key][0]


def _h_value(outcome: SolveOutcome) -> float:
    report = outcome.report
    if report.status == "infeasible" or report.best_primal is None:
        return math.inf
    return float(report.best_primal)


def h_objective(t, problem: Problem, cfg: PWConfig, solver_cfg: Optional[SolverConfig] = None) -> float:
    """Optimal transport cost with rows built at (clip(t), eps_bar); +inf if infeasible."""
    clipped = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    outcome = solve_problem(problem, cfg.epsilon_bar, solver_cfg or SolverConfig(), target=MarginalY(clipped))
    return _h_value(outcome)


def _initial_simplex(start: np.ndarray) -> np.ndarray:
    vertices = [start]
    for k in range(start.shape[0]):
        vertex = start.copy()
        vertex[k] = vertex[k] + SIMPLEX_STEP if vertex[k] + SIMPLEX_STEP <= 1.0 else vertex[k] - SIMPLEX_STEP
        vertices.append(vertex)
    return np.clip(np.vstack(vertices), 0.0, 1.0)


def solve_pw(
    data: Union[Dataset, Problem],
    cfg: PWConfig,
    solver_cfg: Optional[SolverConfig] = None,
) -> PWResult:
    """Minimize H(t) with Nelder-Mead from p_Y plus perturbed restarts.

    Args:
        data: Dataset (prepared with defaults) or an already prepared Problem
        cfg: Pairwise settings
        solver_cfg: Inner solver settings

    Returns:
        PWResult with weights recovered at the best t found
    """
    problem = data if isinstance(data, Problem) else prepare(data)
    solver_cfg = solver_cfg or SolverConfig()
    evaluator = _Evaluator(problem, cfg, solver_cfg)
    p_y = np.asarray(problem.p_y.probs, dtype=np.float64)

    rng = np.random.default_rng(cfg.seed)
    starts = [p_y]
    for _ in range(cfg.restarts):
        starts.append(np.clip(p_y + rng.uniform(-RESTART_SPREAD, RESTART_SPREAD, size=p_y.shape), 0.0, 1.0))

    bounds = [(0.0, 1.0)] * p_y.shape[0]
    for index, start in enumerate(starts):
        evaluator(start)
        result = minimize(
            evaluator,
            start,
            method='Nelder-Mead',
            bounds=bounds,
            options={
                'maxfev': cfg.nm_max_evals,
                'xatol': cfg.nm_tol,
                'fatol': cfg.nm_tol,
                'initial_simplex': _initial_simplex(start),
                'adaptive': False,
            },
        )
        _, best_value = evaluator.best()
        logger.info(f"Nelder-Mead start {index + 1}/{len(starts)}: {result.nfev} evaluations, "
                    f"best H so far {best_value:.6e}")

    key, best_value = evaluator.best()
    if key is None or not math.isfinite(best_value):
        logger.warning("Every evaluated target was infeasible")
        report = PWReport(
            status="infeasible", epsilon=cfg.epsilon, epsilon_bar=cfg.epsilon_bar,
            t_star=None, objective=None, pairwise_violation=None, flagged=True,
            evaluations=len(evaluator.cache), starts=len(starts),
        )
        return PWResult(theta=None, t_star=None, report=report, outcome=None)

    outcome = evaluator.cache[key][1]
    try:
        violation = pairwise_violation(outcome.theta.weights, problem.gi)
    except EvaluationError as e:
        logger.warning(f"Pairwise violation undefined for recovered weights: {e}")
        violation = math.inf
    flagged = not violation <= cfg.epsilon + PAIRWISE_TOL
    if flagged:
        logger.warning(f"Recovered weights exceed the pairwise bound: {violation} > {cfg.epsilon}")

    report = PWReport(
        status=outcome.status,
        epsilon=cfg.epsilon,
        epsilon_bar=cfg.epsilon_bar,
        t_star=list(key),
        objective=outcome.objective,
        pairwise_violation=violation if math.isfinite(violation) else None,
        flagged=flagged,
        evaluations=len(evaluator.cache),
        starts=len(starts),
        inner=outcome.report,
    )
    return PWResult(theta=outcome.theta, t_star=MarginalY(np.asarray(key)), report=report, outcome=outcome)
