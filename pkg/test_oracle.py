"""Tests for the brute-force reference solvers."""
import math

import numpy as np
import pytest

from conftest import make_random
from fairwasp.data.dataset import MarginalY, group_index, marginal_y
from fairwasp.errors import UsageError
from fairwasp.oracle.brute import (
    brute_mip, brute_pairwise_mip, compositions, count_feasible, marginal_feasible, pairwise_feasible, solve_lp,
    transport_cost
)

HALF = MarginalY([0.5, 0.5])


def test_compositions():
    vectors = list(compositions(3))
    assert len(vectors) == math.comb(5, 2)
    assert all(int(v.sum()) == 3 and np.all(v >= 0) for v in vectors)
    assert len({tuple(v) for v in vectors}) == len(vectors)


def test_transport_identity(toy4):
    assert transport_cost(toy4, np.ones(4, dtype=np.int64)) == 0.0


@pytest.mark.parametrize("theta", [[2, 0], [0, 2]])
def test_transport_two_samples(toy2, theta):
    assert transport_cost(toy2, theta) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(5))
def test_transport_modes_agree(seed):
    ds = make_random(6, seed)
    rng = np.random.default_rng(seed)
    theta = np.bincount(rng.integers(0, 6, size=6), minlength=6)
    assert transport_cost(ds, theta, mode="enumerate") == pytest.approx(transport_cost(ds, theta, mode="assignment"))


def test_transport_rejects_bad_input(toy4):
    with pytest.raises(UsageError):
        transport_cost(toy4, [1, 1, 1, 0])
    with pytest.raises(UsageError):
        transport_cost(toy4, [1, 1, 1, 1], mode="simplex")
    with pytest.raises(UsageError):
        transport_cost(make_random(9, 0), np.ones(9, dtype=np.int64), mode="enumerate")


def test_brute_mip_fair_toy(toy4):
    result = brute_mip(toy4, HALF, 0.05)
    assert result.objective == 0.0
    assert result.theta.weights.tolist() == [1, 1, 1, 1]


def test_brute_mip_infeasible_toy(toy2):
    result = brute_mip(toy2, HALF, 0.0)
    assert not result.feasible
    assert result.theta is None
    assert math.isinf(result.objective)


def test_brute_pairwise_fair_toy(toy4):
    result = brute_pairwise_mip(toy4, 0.0)
    assert result.objective == 0.0
    assert result.theta.weights.tolist() == [1, 1, 1, 1]


@pytest.mark.parametrize("seed", range(4))
def test_marginal_rows_imply_pairwise(seed):
    ds = make_random(6, 40 + seed)
    gi = group_index(ds)
    epsilon = 0.44
    epsilon_bar = math.sqrt(1 + epsilon) - 1
    for p in np.linspace(0.1, 0.9, 9):
        t = MarginalY([p, 1 - p])
        inside = count_feasible(ds, lambda theta: marginal_feasible(theta, gi, t, epsilon_bar))
        for theta in inside:
            assert pairwise_feasible(theta, gi, epsilon)


@pytest.mark.parametrize("seed", range(4))
def test_pairwise_optimum_bounded_by_marginal(seed):
    ds = make_random(6, 60 + seed)
    epsilon = 0.2
    pairwise = brute_pairwise_mip(ds, epsilon)
    marginal = brute_mip(ds, marginal_y(ds), math.sqrt(1 + epsilon) - 1)
    assert pairwise.objective <= marginal.objective + 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_lp_relaxation_below_integer_optimum(seed):
    ds = make_random(5, 80 + seed)
    t = marginal_y(ds)
    lp = solve_lp(ds, t, 0.2)
    mip = brute_mip(ds, t, 0.2)
    assert lp.feasible or not mip.feasible
    if mip.feasible:
        assert lp.objective <= mip.objective + 1e-7
        assert lp.theta.sum() == pytest.approx(ds.n)


def test_lp_fair_toy(toy4):
    lp = solve_lp(toy4, HALF, 0.0)
    assert lp.feasible
    assert lp.objective == pytest.approx(0.0, abs=1e-9)


def test_size_limits():
    with pytest.raises(UsageError):
        brute_mip(make_random(8, 0), HALF, 0.1)
    with pytest.raises(UsageError):
        solve_lp(make_random(13, 0), HALF, 0.1)
