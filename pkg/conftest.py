"""Shared fixtures: small hand-checkable datasets and seeded random instances."""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fairwasp.data.dataset import Dataset


def make_dataset(features, d, y) -> Dataset:
    return Dataset.from_arrays(np.asarray(features, dtype=np.float64), d, y, d_values=(0, 1), y_values=(0, 1))


def make_random(n: int, seed: int) -> Dataset:
    """Gaussian features, binary d and y with both values present in each."""
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(n, 2))
    d = rng.permutation(np.arange(n) % 2)
    y = rng.integers(0, 2, size=n)
    y[0], y[-1] = 0, 1
    return make_dataset(features, d, y)


@pytest.fixture
def toy4() -> Dataset:
    """Balanced, already fair: singleton groups (0,0), (0,1), (1,0), (1,1)."""
    return make_dataset([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [1.0, 2.0]], [0, 0, 1, 1], [0, 1, 0, 1])


@pytest.fixture
def toy2() -> Dataset:
    """z1 = (d0, y0) at x=0 and z2 = (d1, y1) at x=1; infeasible at epsilon 0."""
    return make_dataset([[0.0], [1.0]], [0, 1], [0, 1])


@pytest.fixture
def random_instance():
    return make_random


TOY4_CSV = "x1,x2,d,y\n0,0,0,0\n1,0,0,1\n0,2,1,0\n1,2,1,1\n"
TOY2_CSV = "x1,d,y\n0,0,0\n1,1,1\n"


@pytest.fixture
def toy4_csv(tmp_path) -> Path:
    path = tmp_path / "toy4.csv"
    path.write_text(TOY4_CSV)
    return path


@pytest.fixture
def toy2_csv(tmp_path) -> Path:
    path = tmp_path / "toy2.csv"
    path.write_text(TOY2_CSV)
    return path
