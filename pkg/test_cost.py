"""Tests for pairwise costs, compression and the binary cache."""
import numpy as np
import pytest
from scipy.spatial.distance import cdist

from conftest import make_dataset
from fairwasp.data.dataset import group_index, standardize
from fairwasp.errors import ConfigurationError, UsageError
from fairwasp.solver import cost
from fairwasp.solver.cost import compress, pair_cost
from fairwasp.utils.cache import MAGIC, cache_path, load_compressed, save_compressed


def test_pair_cost_examples():
    ds = make_dataset([[0.0, 0.0], [3.0, 4.0]], [0, 1], [0, 1])
    assert pair_cost(ds, 0, 1) == pytest.approx(5.0)
    assert pair_cost(ds, 1, 1) == 0.0
    assert pair_cost(ds, 0, 1, metric="cityblock") == pytest.approx(7.0)
    assert pair_cost(ds, 0, 1, metric="sqeuclidean") == pytest.approx(25.0)


def test_pair_cost_symmetric(random_instance):
    ds = random_instance(20, 0)
    rng = np.random.default_rng(1)
    for i, j in rng.integers(0, ds.n, size=(10, 2)):
        assert pair_cost(ds, i, j) == pair_cost(ds, j, i)


def test_pair_cost_out_of_range(toy2):
    with pytest.raises(UsageError):
        pair_cost(toy2, 0, 2)
    with pytest.raises(UsageError):
        pair_cost(toy2, -1, 0)


def test_unknown_metric(toy2):
    with pytest.raises(ConfigurationError):
        compress(toy2, group_index(toy2), metric="cosine")


def test_compress_two_samples(toy2):
    cc = compress(toy2, group_index(toy2), threads=1)
    assert cc.row_group_min.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert cc.row_group_argmin.tolist() == [[0, 1], [0, 1]]


def _dense_check(ds, cc, metric="euclidean"):
    gi = group_index(ds)
    C = cdist(ds.features, ds.features, metric=metric)
    for l, members in enumerate(gi.groups):
        assert np.array_equal(cc.row_group_min[:, l], C[:, members].min(axis=1))
        assert np.all(np.isin(cc.row_group_argmin[:, l], members))
    rows = np.arange(ds.n)
    for l in range(gi.L):
        assert np.array_equal(C[rows, cc.row_group_argmin[:, l]], cc.row_group_min[:, l])


@pytest.mark.parametrize("metric", ["euclidean", "sqeuclidean", "cityblock"])
def test_compress_matches_dense(random_instance, metric):
    ds = standardize(random_instance(50, 11))
    cc = compress(ds, group_index(ds), metric=metric, threads=1)
    _dense_check(ds, cc, metric)
    assert np.all(cc.row_group_min >= 0)


def test_compress_own_group_is_zero(random_instance):
    ds = random_instance(40, 5)
    gi = group_index(ds)
    cc = compress(ds, gi, threads=1)
    assert np.all(cc.row_group_min[np.arange(ds.n), gi.group_of] == 0.0)


def test_compress_tie_takes_smallest_column():
    # samples 1 and 2 are identical and share a group
    ds = make_dataset([[0.0], [1.0], [1.0], [5.0]], [0, 1, 1, 0], [0, 1, 1, 1])
    gi = group_index(ds)
    cc = compress(ds, gi, threads=1)
    l = int(gi.group_of[1])
    assert cc.row_group_argmin[0, l] == 1


def test_compress_threads_identical(random_instance, monkeypatch):
    monkeypatch.setattr(cost, "BLOCK_ENTRIES", 200)
    ds = random_instance(60, 9)
    gi = group_index(ds)
    single = compress(ds, gi, threads=1)
    multi = compress(ds, gi, threads=4)
    assert np.array_equal(single.row_group_min, multi.row_group_min)
    assert np.array_equal(single.row_group_argmin, multi.row_group_argmin)


def test_compress_outputs_read_only(toy2):
    cc = compress(toy2, group_index(toy2), threads=1)
    with pytest.raises(ValueError):
        cc.row_group_min[0, 0] = 1.0


def test_cache_layout(tmp_path, random_instance):
    ds = random_instance(12, 2)
    cc = compress(ds, group_index(ds), threads=1)
    path = save_compressed(cc, cache_path(tmp_path, "abc"))
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert int.from_bytes(raw[4:8], "little") == cc.n
    assert int.from_bytes(raw[8:12], "little") == cc.L
    assert len(raw) == 12 + cc.n * cc.L * 12

    loaded = load_compressed(path)
    assert np.array_equal(loaded.row_group_min, cc.row_group_min)
    assert np.array_equal(loaded.row_group_argmin, cc.row_group_argmin)


def test_cache_rejects_bad_files(tmp_path):
    assert load_compressed(tmp_path / "missing.fwcc") is None
    bad = tmp_path / "bad.fwcc"
    bad.write_bytes(b"XXXX" + b"\x00" * 8)
    assert load_compressed(bad) is None
    short = tmp_path / "short.fwcc"
    short.write_bytes(MAGIC + (2).to_bytes(4, "little") + (2).to_bytes(4, "little"))
    assert load_compressed(short) is None
