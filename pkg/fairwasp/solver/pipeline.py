"""End-to-end solve: standardize, compress, cut, recover.

The compressed cost is built once per dataset and shared by every solve on
it, which is what makes repeated solves (pairwise search, epsilon sweeps)
cheap.
"""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from fairwasp.config import COST_METRIC, STANDARDIZE
from fairwasp.data.dataset import Dataset, GroupIndex, MarginalY, group_index, marginal_y, standardize
from fairwasp.errors import EvaluationError
from fairwasp.solver.accpm import SolverConfig, SolverReport, solve
from fairwasp.solver.completion import apply_completion, complete, plan_weights
from fairwasp.solver.cost import CompressedCost, check_metric, compress
from fairwasp.solver.fairness import ConstraintMatrix, build_constraints, fairness_violation
from fairwasp.solver.recover import Recovery, WeightVector, recover_weights
from fairwasp.utils.cache import cache_path, load_compressed, save_compressed

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Problem:
    """A dataset prepared for solving."""

    ds: Dataset
    gi: GroupIndex
    p_y: MarginalY
    cc: CompressedCost
    timings: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    """Solver report plus the recovered weights."""

    report: SolverReport
    cm: ConstraintMatrix
    theta: WeightVector
    objective: float
    tie_count: int
    violation: Optional[float]
    timings: Dict[str, float]

    @property
    def status(self) -> str:
        return self.report.status

    @property
    def wasserstein(self) -> float:
        """Transport cost per unit mass between original and reweighted data."""
        return self.objective / self.theta.n


def prepare(
    ds: Dataset,
    standardize_features: bool = STANDARDIZE,
    metric: str = COST_METRIC,
    threads: Optional[int] = None,
    cache_dir: Optional[Union[str, Path]] = None,
) -> Problem:
    """Standardize, partition and compress a dataset."""
    check_metric(metric)
    work = standardize(ds) if standardize_features else ds
    gi = group_index(work)
    started = time.perf_counter()
    cc = None
    key = None
    if cache_dir:
        key = work.content_hash(extra=metric)
        cc = load_compressed(cache_path(cache_dir, key), metric=metric)
        if cc is not None and (cc.n, cc.L) != (work.n, gi.L):
            logger.warning(f"Cached costs have shape {(cc.n, cc.L)}, expected {(work.n, gi.L)}; recomputing")
            cc = None
        if cc is not None:
            logger.info(f"Loaded compressed costs from cache {key[:12]}")
    if cc is None:
        cc = compress(work, gi, metric=metric, threads=threads)
        if cache_dir:
            save_compressed(cc, cache_path(cache_dir, key))
    elapsed = time.perf_counter() - started
    return Problem(ds=work, gi=gi, p_y=marginal_y(work), cc=cc, timings={"compress": elapsed})


def solve_problem(
    problem: Problem,
    epsilon: float,
    cfg: Optional[SolverConfig] = None,
    target: Optional[MarginalY] = None,
    dedup_binary_y: Optional[bool] = None,
) -> SolveOutcome:
    """Solve the marginal-targeted problem and recover integer weights.

    Args:
        problem: Prepared dataset
        epsilon: Ratio tolerance
        cfg: Solver configuration
        target: Target marginal t; defaults to the data's p_Y
        dedup_binary_y: See build_constraints

    Returns:
        SolveOutcome; weights come from the integer completion when it ran
        and improved on the dual loop, else from the best feasible candidate,
        else from lambda_star
    """
    cfg = cfg or SolverConfig()
    target = target if target is not None else problem.p_y
    cm = build_constraints(problem.gi, target, epsilon, dedup_binary_y=dedup_binary_y)

    started = time.perf_counter()
    report = solve(problem.cc, cm, cfg)
    solve_time = time.perf_counter() - started

    timings = {**problem.timings, "solve": solve_time}
    completion = None
    if cfg.completion and report.status in ("iteration-limit", "numerical-failure"):
        started = time.perf_counter()
        completion = complete(problem.cc, cm, report, cfg)
        report = apply_completion(report, completion, cfg.gap_tol)
        timings["complete"] = time.perf_counter() - started
        logger.info(f"Integer completion {completion.status}: status={report.status} gap={report.rel_gap}")

    started = time.perf_counter()
    if completion is not None and completion.chosen_group is not None:
        recovery = Recovery(
            theta=WeightVector(plan_weights(problem.cc, completion.chosen_group)),
            objective=completion.objective,
            tie_count=0,
        )
    else:
        source = report.primal_lambda if report.primal_lambda is not None else report.lambda_star
        recovery = recover_weights(np.asarray(source), problem.cc, cm, threads=cfg.threads)
    timings["recover"] = time.perf_counter() - started

    try:
        violation = fairness_violation(recovery.theta.weights, problem.gi, target, epsilon)
    except EvaluationError as e:
        logger.warning(f"Recovered weights leave a protected class empty: {e}")
        violation = None

    status = report.status
    if status == "converged" and recovery.tie_count:
        status = "converged-with-ties"
    report = report.model_copy(update={"status": status, "tie_count": recovery.tie_count})
    if not report.has_primal:
        logger.warning(f"No feasible candidate found (status {report.status}); "
                       f"weights at lambda* have violation {violation}")

    return SolveOutcome(
        report=report,
        cm=cm,
        theta=recovery.theta,
        objective=recovery.objective,
        tie_count=recovery.tie_count,
        violation=violation,
        timings=timings,
    )
