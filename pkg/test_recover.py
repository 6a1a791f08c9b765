"""Tests for weight recovery, gaps, materialization and the weights file."""
import numpy as np
import pytest

from conftest import make_random
from fairwasp.data.dataset import MarginalY, group_index, marginal_y, standardize
from fairwasp.errors import DataError, UsageError
from fairwasp.solver.cost import CompressedCost, compress
from fairwasp.solver.fairness import ConstraintMatrix, RowMeta, build_constraints, fairness_violation
from fairwasp.solver.recover import (
    WeightVector, materialize, read_weights_csv, recover_weights, relative_objective_gap, write_weights_csv
)

HALF = MarginalY([0.5, 0.5])


def test_recover_at_zero_is_identity(toy4):
    ds = standardize(toy4)
    gi = group_index(ds)
    cc = compress(ds, gi, threads=1)
    cm = build_constraints(gi, HALF, 0.0)
    recovery = recover_weights(np.zeros(cm.m), cc, cm)
    assert recovery.theta.weights.tolist() == [1, 1, 1, 1]
    assert recovery.objective == 0.0
    assert recovery.tie_count == 0


def test_recover_two_sample_toy():
    cc = CompressedCost(
        row_group_min=np.array([[0.0, 1.0], [1.0, 0.0]]),
        row_group_argmin=np.array([[0, 1], [0, 1]]),
    )
    cm = ConstraintMatrix(coeff=np.array([[-0.5, 0.0]]), epsilon=0.0, target=HALF,
                          row_meta=(RowMeta(0, 0, "upper"),))
    recovery = recover_weights(np.array([2.0]), cc, cm)
    # row 0 is tied between both groups and keeps its own column
    assert recovery.theta.weights.tolist() == [1, 1]
    assert recovery.objective == 0.0
    assert recovery.tie_count == 1


def test_recover_rejects_negative_lambda(toy4):
    ds = standardize(toy4)
    gi = group_index(ds)
    cm = build_constraints(gi, HALF, 0.0)
    with pytest.raises(UsageError):
        recover_weights(-np.ones(cm.m), compress(ds, gi, threads=1), cm)


def test_recovered_weights_are_integral(random_instance):
    ds = standardize(random_instance(25, 1))
    gi = group_index(ds)
    cc = compress(ds, gi, threads=1)
    cm = build_constraints(gi, marginal_y(ds), 0.1)
    rng = np.random.default_rng(0)
    for _ in range(10):
        recovery = recover_weights(rng.uniform(0, 5, size=cm.m), cc, cm)
        assert recovery.theta.weights.dtype == np.int64
        assert int(recovery.theta.weights.sum()) == ds.n
        assert np.all(recovery.theta.weights >= 0)


@pytest.mark.parametrize("a, b, expected", [(0.0, 0.0, 0.0), (1.0, 1.0, 0.0), (2.0, 1.0, 0.25)])
def test_relative_objective_gap(a, b, expected):
    assert relative_objective_gap(a, b) == pytest.approx(expected)


def test_weight_vector_validation():
    with pytest.raises(UsageError):
        WeightVector(np.array([2, 0, 0]))
    with pytest.raises(UsageError):
        WeightVector(np.array([2, -1, 2]))
    with pytest.raises(UsageError):
        WeightVector(np.array([1.5, 0.5]))
    assert WeightVector.uniform(3).weights.tolist() == [1, 1, 1]


def test_materialize_identity(toy4):
    out = materialize(toy4, WeightVector.uniform(4))
    assert np.array_equal(out.features, toy4.features)
    assert np.array_equal(out.d_labels, toy4.d_labels)
    assert np.array_equal(out.y_labels, toy4.y_labels)


def test_materialize_counts(toy4):
    out = materialize(toy4, WeightVector(np.array([2, 0, 1, 1])))
    expected_rows = [0, 0, 2, 3]
    assert np.array_equal(out.features, toy4.features[expected_rows])
    assert out.n == 4


def test_materialize_rejects_bad_sum(toy4):
    with pytest.raises(UsageError):
        materialize(toy4, np.array([2, 0, 1, 2]))


def test_materialize_conserves_groups(random_instance):
    ds = random_instance(20, 4)
    gi = group_index(ds)
    rng = np.random.default_rng(4)
    theta = np.bincount(rng.integers(0, ds.n, size=ds.n), minlength=ds.n)
    out = materialize(ds, WeightVector(theta))
    assert out.n == ds.n
    before = gi.group_sums(theta)
    out_gi = group_index(out)
    after = np.zeros(gi.L)
    for l in range(out_gi.L):
        match = np.flatnonzero((gi.group_d == out_gi.group_d[l]) & (gi.group_y == out_gi.group_y[l]))
        after[match[0]] = len(out_gi.groups[l])
    assert np.array_equal(before, after)


def test_materialize_preserves_violation():
    ds = make_random(16, 12)
    gi = group_index(ds)
    t = marginal_y(ds)
    theta = np.array([2, 0, 1, 1, 3, 0, 1, 1, 1, 0, 2, 1, 1, 0, 1, 1])
    out = materialize(ds, WeightVector(theta))
    weighted = fairness_violation(theta, gi, t, 0.05)
    unit = fairness_violation(np.ones(out.n), group_index(out), t, 0.05)
    assert unit == pytest.approx(weighted, abs=1e-12)


def test_weights_file(tmp_path):
    theta = WeightVector(np.array([0, 2, 1, 1]))
    path = write_weights_csv(theta, tmp_path / "w.csv")
    assert path.read_text() == "index,weight\n0,0\n1,2\n2,1\n3,1\n"
    assert read_weights_csv(path, 4).weights.tolist() == [0, 2, 1, 1]
    with pytest.raises(DataError):
        read_weights_csv(path, 5)
    with pytest.raises(DataError):
        read_weights_csv(tmp_path / "missing.csv", 4)
