"""Tests for the exact integer completion step."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_random
from fairwasp.data.dataset import MarginalY, group_index, standardize
from fairwasp.oracle.brute import brute_mip
from fairwasp.solver.accpm import SolverConfig, SolverReport, solve
from fairwasp.solver.completion import (
    Completion, apply_completion, complete, plan_cost, plan_weights, reduced_costs
)
from fairwasp.solver.cost import compress
from fairwasp.solver.dual import evaluate
from fairwasp.solver.fairness import build_constraints
from fairwasp.solver.pipeline import prepare

GAP_TOL = 1e-3


def _blank_report(m: int) -> SolverReport:
    """A dual loop that produced nothing: no incumbent, no bound."""
    return SolverReport(status="numerical-failure", lambda_star=[0.0] * m, best_dual=None,
                        best_primal=None, rel_gap=None, iterations=0, lambda_box=1.0)


@given(st.integers(min_value=4, max_value=20), st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_reduced_costs_vanish_on_the_dual_plan(n, seed):
    problem = prepare(make_random(n, seed))
    cm = build_constraints(problem.gi, problem.p_y, 0.1)
    lam = np.random.default_rng(seed).uniform(0.0, 5.0, size=cm.m)
    delta = reduced_costs(lam, problem.cc, cm)
    chosen = evaluate(lam, problem.cc, cm).chosen_group
    assert np.all(delta >= 0)
    assert np.allclose(delta[np.arange(n), chosen], 0.0)


def test_plan_weights_and_cost(toy4):
    problem = prepare(toy4)
    own = np.arange(4)
    assert plan_weights(problem.cc, own).tolist() == [1, 1, 1, 1]
    assert plan_cost(problem.cc, own) == 0.0
    # every row moved to the (d0, y0) group lands on sample 0
    assert plan_weights(problem.cc, np.zeros(4, dtype=int)).tolist() == [4, 0, 0, 0]


@pytest.mark.parametrize("seed", range(100, 110))
def test_full_problem_matches_brute_force(seed):
    problem = prepare(make_random(6, seed))
    cm = build_constraints(problem.gi, problem.p_y, 0.05)
    completion = complete(problem.cc, cm, _blank_report(cm.m), SolverConfig())
    oracle = brute_mip(problem.ds, problem.p_y, 0.05)
    if not oracle.feasible:
        assert completion.status == "infeasible"
        return
    assert completion.status == "optimal"
    assert completion.fixed_rows == 0
    assert completion.objective == pytest.approx(oracle.objective, rel=1e-6, abs=1e-9)
    assert completion.lower_bound <= completion.objective + 1e-9
    theta = plan_weights(problem.cc, completion.chosen_group)
    assert cm.is_satisfied(theta, problem.gi, tol=1e-9)


@pytest.mark.parametrize("seed", range(200, 205))
def test_fixing_keeps_the_optimum(seed):
    problem = prepare(make_random(40, seed))
    cm = build_constraints(problem.gi, problem.p_y, 0.05)
    report = solve(problem.cc, cm, SolverConfig(gap_tol=1e-9, max_iters=60))
    if not report.has_primal:
        pytest.skip("no incumbent to fix rows against")
    fixed = complete(problem.cc, cm, report, SolverConfig())
    full = complete(problem.cc, cm, _blank_report(cm.m), SolverConfig())
    assert full.status == "optimal"
    assert fixed.objective == pytest.approx(full.objective, rel=1e-6)
    assert fixed.objective <= report.best_primal + 1e-9


def test_infeasible_rows(toy2):
    ds = standardize(toy2)
    gi = group_index(ds)
    cc = compress(ds, gi, threads=1)
    cm = build_constraints(gi, MarginalY([0.5, 0.5]), 0.0)
    completion = complete(cc, cm, _blank_report(cm.m), SolverConfig())
    assert completion.status == "infeasible"
    assert completion.chosen_group is None


def test_too_many_options_is_skipped():
    problem = prepare(make_random(10, 1))
    cm = build_constraints(problem.gi, problem.p_y, 0.05)
    completion = complete(problem.cc, cm, _blank_report(cm.m), SolverConfig(completion_max_vars=5))
    assert completion.status == "skipped"
    assert completion.objective is None


def test_apply_completion_closes_the_gap():
    report = SolverReport(status="iteration-limit", lambda_star=[1.0], best_dual=2.0, best_primal=3.0,
                          rel_gap=1.0 / 6.0, iterations=500, lambda_box=10.0)
    done = apply_completion(report, Completion("optimal", None, 3.0, 3.0, 4, 10), GAP_TOL)
    assert done.status == "converged"
    assert done.rel_gap == 0.0
    assert done.best_dual == 2.0
    assert done.integer_bound == 3.0
    assert done.fixed_rows == 4

    proven = apply_completion(report, Completion("infeasible", None, None, None, 0, 10), GAP_TOL)
    assert proven.status == "infeasible"

    stopped = apply_completion(report, Completion("limit", None, 3.0, 2.5, 0, 10), GAP_TOL)
    assert stopped.status == "iteration-limit"
    assert stopped.rel_gap == pytest.approx(0.5 / 6.5)
