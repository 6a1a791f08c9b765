"""Tests for the pairwise-parity search over targets."""
import math

import numpy as np
import pytest

from conftest import make_random
from fairwasp.oracle.brute import brute_pairwise_mip
from fairwasp.solver.accpm import SolverConfig
from fairwasp.solver.pairwise import PWConfig, h_objective, solve_pw
from fairwasp.solver.pipeline import prepare, solve_problem

GAP_TOL = 1e-3


@pytest.mark.parametrize("epsilon", [0.0, 0.05, 0.2, 1.0])
def test_epsilon_bar(epsilon):
    cfg = PWConfig(epsilon=epsilon)
    assert cfg.epsilon_bar == pytest.approx(math.sqrt(1 + epsilon) - 1)
    assert 0.0 <= cfg.epsilon_bar <= epsilon
    assert "epsilon_bar" in cfg.model_dump()


def test_h_at_marginal_on_fair_data(toy4):
    problem = prepare(toy4)
    assert h_objective(problem.p_y.probs, problem, PWConfig(epsilon=0.2)) == pytest.approx(0.0, abs=1e-9)


def test_h_clips_targets(toy4):
    problem = prepare(toy4)
    cfg = PWConfig(epsilon=0.2)
    assert h_objective([1.5, 0.5], problem, cfg) == h_objective([1.0, 0.5], problem, cfg)


def test_solve_pw_fair_data(toy4):
    result = solve_pw(toy4, PWConfig(epsilon=0.2, nm_max_evals=20, restarts=0))
    assert result.report.objective == pytest.approx(0.0, abs=1e-9)
    assert result.theta.weights.tolist() == [1, 1, 1, 1]
    assert np.allclose(result.t_star.probs, [0.5, 0.5])
    assert not result.report.flagged


def test_solve_pw_infeasible_near_marginal(toy2):
    result = solve_pw(toy2, PWConfig(epsilon=0.0, nm_max_evals=10, restarts=0))
    assert result.report.status == "infeasible"
    assert result.theta is None
    assert result.report.flagged


@pytest.mark.parametrize("seed", range(3))
def test_solve_pw_no_worse_than_marginal_start(seed):
    problem = prepare(make_random(10, 500 + seed))
    cfg = PWConfig(epsilon=0.2, nm_max_evals=30, restarts=1, seed=seed)
    result = solve_pw(problem, cfg)
    start = solve_problem(problem, cfg.epsilon_bar, SolverConfig())
    if start.report.best_primal is None:
        return
    assert result.report.objective <= start.report.best_primal + 1e-6
    assert not result.report.flagged
    assert result.report.pairwise_violation <= cfg.epsilon + 1e-6
    assert result.report.evaluations >= 1
    assert all(0.0 <= v <= 1.0 for v in result.report.t_star)


def test_solve_pw_deterministic():
    problem = prepare(make_random(8, 42))
    cfg = PWConfig(epsilon=0.2, nm_max_evals=25, restarts=1, seed=3)
    a = solve_pw(problem, cfg)
    b = solve_pw(problem, cfg)
    assert a.report.t_star == b.report.t_star
    assert np.array_equal(a.theta.weights, b.theta.weights)


@pytest.mark.slow
def test_solve_pw_against_brute_force():
    rng = np.random.default_rng(77)
    wins = 0
    for k in range(10):
        problem = prepare(make_random(int(rng.integers(4, 7)), 900 + k))
        result = solve_pw(problem, PWConfig(epsilon=0.2, nm_max_evals=60, restarts=2, seed=k))
        oracle = brute_pairwise_mip(problem.ds, 0.2)
        if result.theta is None:
            continue
        assert not result.report.flagged
        if result.report.objective <= oracle.objective + 2 * GAP_TOL:
            wins += 1
    assert wins >= 8
