"""Integer weights from dual multipliers, and their materialization."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np
import pandas as pd

from fairwasp.data.dataset import Dataset
from fairwasp.errors import DataError, UsageError
from fairwasp.solver.cost import CompressedCost
from fairwasp.solver.dual import evaluate
from fairwasp.solver.fairness import ConstraintMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Nonnegative integer sample weights summing to n."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.ndim != 1:
            raise UsageError(f"Weights must be a vector, got shape {w.shape}")
        if w.size and (np.any(w < 0) or np.any(w != np.round(w))):
            raise UsageError("Weights must be nonnegative integers")
        w = w.astype(np.int64)
        if int(w.sum()) != w.shape[0]:
            raise UsageError(f"Weights sum to {int(w.sum())}, expected n={w.shape[0]}")
        w.flags.writeable = False
        object.__setattr__(self, 'weights', w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.ones(n, dtype=np.int64))


class Recovery(NamedTuple):
    theta: WeightVector
    objective: float
    tie_count: int


def recover_weights(lambda_star, cc: CompressedCost, cm: ConstraintMatrix, threads: int = 1) -> Recovery:
    """Weights theta = P^T e for the plan that maximizes the dual at lambda_star.

    Integrality holds by construction: each row sends its unit mass to one
    column, so theta counts arrivals per column.
    """
    lam = np.asarray(lambda_star, dtype=np.float64)
    if np.any(lam < 0):
        raise UsageError("lambda_star must be nonnegative")
    evaluation = evaluate(lam, cc, cm, threads=threads)
    if evaluation.tie_count:
        logger.warning(f"{evaluation.tie_count} rows have tied maxima at lambda*; "
                       f"the recovered plan may not be the unique optimum")
    return Recovery(
        theta=WeightVector(evaluation.column_counts),
        objective=evaluation.primal_objective,
        tie_count=evaluation.tie_count,
    )


def relative_objective_gap(obj_a: float, obj_b: float) -> float:
    return abs(obj_a - obj_b) / (abs(obj_a) + abs(obj_b) + 1.0)


def materialize(ds: Dataset, theta: WeightVector) -> Dataset:
    """Repeat sample i theta_i times, keeping original index order."""
    weights = np.asarray(theta.weights if isinstance(theta, WeightVector) else theta)
    if weights.shape != (ds.n,):
        raise UsageError(f"Weights cover {weights.shape[0]} rows, dataset has {ds.n}")
    if int(weights.sum()) != ds.n:
        raise UsageError(f"Weights sum to {int(weights.sum())}, expected n={ds.n}")
    rows = np.repeat(np.arange(ds.n), weights)
    frame = None
    if ds.frame is not None:
        frame = ds.frame.iloc[rows].reset_index(drop=True)
    return Dataset.from_arrays(
        ds.features[rows],
        [ds.d_values[i] for i in ds.d_labels[rows]],
        [ds.y_values[i] for i in ds.y_labels[rows]],
        d_values=ds.d_values,
        y_values=ds.y_values,
        feature_names=ds.feature_names,
        d_column=ds.d_column,
        y_column=ds.y_column,
        frame=frame,
    )


def write_weights_csv(theta: WeightVector, path: Union[str, Path]) -> Path:
    """Write `index,weight` rows, zero weights included."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame({"index": np.arange(theta.n), "weight": theta.weights})
    table.to_csv(path, index=False, lineterminator="\n")
    return path


def read_weights_csv(path: Union[str, Path], n: int) -> WeightVector:
    """Read a weights file written by write_weights_csv."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"Weights file not found: {path}")
    table = pd.read_csv(path)
    if list(table.columns) != ["index", "weight"]:
        raise DataError(f"Weights file {path} must have columns index,weight")
    if len(table) != n or not np.array_equal(table["index"].to_numpy(), np.arange(n)):
        raise DataError(f"Weights file {path} must list indices 0..{n - 1} in order")
    return WeightVector(table["weight"].to_numpy())
