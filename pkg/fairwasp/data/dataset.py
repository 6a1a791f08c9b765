"""Classification datasets and the (d, y) group partition.

A Dataset holds a numeric feature matrix plus protected-attribute (d) and
outcome (y) labels. Labels are stored as dense ids 0..|D|-1 and 0..|Y|-1 in
first-appearance order; the original values are kept for output.
"""
import hashlib
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from fairwasp.config import CSV_DELIMITER, INCLUDE_D_IN_FEATURES
from fairwasp.errors import ConfigurationError, DataError

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def _encode_labels(values: Sequence, known: Optional[Sequence] = None) -> Tuple[np.ndarray, tuple]:
    """Map raw label values to dense ids.

    Args:
        values: Raw labels, one per sample
        known: Full label set in id order; inferred in first-appearance
            order when omitted

    Returns:
        (ids, label_values)
    """
    if known is None:
        codes, uniques = pd.factorize(pd.Series(list(values)), sort=False)
        return codes.astype(np.int64), tuple(uniques.tolist())
    lookup = {value: idx for idx, value in enumerate(known)}
    try:
        codes = np.array([lookup[v] for v in values], dtype=np.int64)
    except KeyError as e:
        raise DataError(f"Label {e.args[0]!r} is not in the declared label set {tuple(known)}")
    return codes, tuple(known)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable classification dataset."""

    features: np.ndarray
    d_labels: np.ndarray
    y_labels: np.ndarray
    d_values: tuple
    y_values: tuple
    feature_names: tuple
    d_column: str = "d"
    y_column: str = "y"
    # Original table, used to write materialized output with the input schema
    frame: Optional[pd.DataFrame] = field(default=None, compare=False, repr=False)

    @classmethod
    def from_arrays(
        cls,
        features,
        d_labels,
        y_labels,
        d_values: Optional[Sequence] = None,
        y_values: Optional[Sequence] = None,
        feature_names: Optional[Sequence[str]] = None,
        d_column: str = "d",
        y_column: str = "y",
        frame: Optional[pd.DataFrame] = None,
    ) -> "Dataset":
        """Build a dataset from raw arrays.

        Args:
            features: n x p numeric matrix (a 1-D array is one feature)
            d_labels: protected-attribute labels
            y_labels: outcome labels
            d_values: full protected label set; inferred when omitted
            y_values: full outcome label set; inferred when omitted
            feature_names: column names for the features
            d_column: protected column name used on output
            y_column: outcome column name used on output
            frame: original table, if any

        Returns:
            A validated Dataset
        """
        x = np.asarray(features, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise DataError(f"Feature matrix must be 2-D, got shape {x.shape}")
        n, p = x.shape
        if n == 0:
            raise DataError("Dataset has no rows")
        if p == 0:
            raise DataError("Dataset has no feature columns")
        if len(d_labels) != n or len(y_labels) != n:
            raise DataError(
                f"Label length mismatch: {len(d_labels)} d labels, "
                f"{len(y_labels)} y labels for {n} rows"
            )
        bad = np.argwhere(~np.isfinite(x))
        if bad.size:
            row, col = bad[0]
            names = feature_names or [f"x{j + 1}" for j in range(p)]
            raise DataError("Non-finite feature value", row=int(row) + 1, column=names[col])

        d_ids, d_vals = _encode_labels(d_labels, d_values)
        y_ids, y_vals = _encode_labels(y_labels, y_values)
        if feature_names is None:
            feature_names = [f"x{j + 1}" for j in range(p)]

        return cls(
            features=_frozen(x.copy()),
            d_labels=_frozen(d_ids),
            y_labels=_frozen(y_ids),
            d_values=d_vals,
            y_values=y_vals,
            feature_names=tuple(feature_names),
            d_column=d_column,
            y_column=y_column,
            frame=frame,
        )

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def n_d(self) -> int:
        return len(self.d_values)

    @property
    def n_y(self) -> int:
        return len(self.y_values)

    def require_two_classes(self) -> None:
        """Reject datasets where the fairness problem is vacuous."""
        if len(np.unique(self.y_labels)) < 2:
            raise DataError("Dataset has a single outcome class")
        if len(np.unique(self.d_labels)) < 2:
            raise DataError("Dataset has a single protected class")

    def content_hash(self, extra: str = "") -> str:
        """SHA-256 over features, labels and an optional suffix."""
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.features).tobytes())
        digest.update(self.d_labels.astype('<i8').tobytes())
        digest.update(self.y_labels.astype('<i8').tobytes())
        digest.update(extra.encode('utf-8'))
        return digest.hexdigest()

    def to_frame(self) -> pd.DataFrame:
        """Table with the input schema (original frame when available)."""
        if self.frame is not None:
            return self.frame
        table = pd.DataFrame(self.features, columns=list(self.feature_names))
        table[self.d_column] = [self.d_values[i] for i in self.d_labels]
        table[self.y_column] = [self.y_values[i] for i in self.y_labels]
        return table


@dataclass(frozen=True, eq=False)
class GroupIndex:
    """Partition of sample indices into (d, y) groups, ordered by (d, y)."""

    groups: tuple
    group_of: np.ndarray
    group_d: np.ndarray
    group_y: np.ndarray
    n_d: int
    n_y: int

    @property
    def L(self) -> int:
        return len(self.groups)

    @property
    def n(self) -> int:
        return self.group_of.shape[0]

    def d_members(self, d: int) -> np.ndarray:
        """All sample indices with protected class d."""
        parts = [g for g, gd in zip(self.groups, self.group_d) if gd == d]
        if not parts:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(parts))

    def observed_d(self) -> np.ndarray:
        return np.unique(self.group_d)

    def group_sums(self, theta) -> np.ndarray:
        """Sum weights over each group."""
        weights = np.asarray(theta, dtype=np.float64)
        return np.bincount(self.group_of, weights=weights, minlength=self.L)


@dataclass(frozen=True, eq=False)
class MarginalY:
    """Outcome marginal, or a candidate target t in [0, 1]^|Y|."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'probs', _frozen(np.array(self.probs, dtype=np.float64)))

    def __len__(self) -> int:
        return self.probs.shape[0]


def load_csv(
    path: Union[str, Path],
    d_column: str,
    y_column: str,
    include_d_in_features: bool = INCLUDE_D_IN_FEATURES,
    delimiter: str = CSV_DELIMITER,
) -> Dataset:
    """Load a dataset from a CSV file with a header row.

    Args:
        path: CSV file path
        d_column: protected-attribute column
        y_column: outcome column
        include_d_in_features: also use the protected column as a feature
        delimiter: field delimiter

    Returns:
        Dataset with inferred label sets, rows in file order
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Input file not found: {path}")
    try:
        frame = pd.read_csv(path, sep=delimiter, encoding='utf-8', dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataError(f"Input file {path} is empty")

    for column in (d_column, y_column):
        if column not in frame.columns:
            raise ConfigurationError(
                f"Column '{column}' not found in {path}; available: {list(frame.columns)}"
            )
    if d_column == y_column:
        raise ConfigurationError("Protected and outcome columns must differ")
    if len(frame) == 0:
        raise DataError(f"Input file {path} has no data rows")

    for column in (d_column, y_column):
        blank = frame[column].str.strip() == ""
        if blank.any():
            raise DataError("Missing label", row=int(np.argmax(blank.values)) + 1, column=column)

    feature_columns = [c for c in frame.columns if c not in (d_column, y_column)]
    numeric = {}
    for column in feature_columns:
        values = pd.to_numeric(frame[column], errors='coerce')
        bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=np.float64, na_value=np.nan))
        if bad.any():
            row = int(np.argmax(bad.values))
            raise DataError(
                f"Non-numeric or missing feature value {frame[column].iloc[row]!r}",
                row=row + 1, column=column
            )
        numeric[column] = values.to_numpy(dtype=np.float64)

    d_ids, _ = _encode_labels(frame[d_column].tolist())
    names = list(feature_columns)
    if include_d_in_features:
        d_numeric = pd.to_numeric(frame[d_column], errors='coerce')
        numeric[d_column] = (
            d_numeric.to_numpy(dtype=np.float64) if not d_numeric.isna().any()
            else d_ids.astype(np.float64)
        )
        names.append(d_column)
    if not names:
        raise DataError(f"Input file {path} has no feature columns")

    features = np.column_stack([numeric[c] for c in names])
    typed = frame.copy()
    for column in feature_columns:
        typed[column] = numeric[column]

    ds = Dataset.from_arrays(
        features,
        frame[d_column].tolist(),
        frame[y_column].tolist(),
        feature_names=names,
        d_column=d_column,
        y_column=y_column,
        frame=typed,
    )
    ds.require_two_classes()
    logger.info(f"Loaded {path}: n={ds.n}, p={ds.p}, |D|={ds.n_d}, |Y|={ds.n_y}")
    return ds


def standardize(ds: Dataset) -> Dataset:
    """Divide every feature column by its sample standard deviation.

    No centering; zero-variance columns pass through unchanged.
    """
    if ds.n < 2:
        return ds
    std = ds.features.std(axis=0, ddof=1)
    scale = np.where(std > 0, std, 1.0)
    return replace(ds, features=_frozen(ds.features / scale))


def marginal_y(ds: Dataset) -> MarginalY:
    """Empirical outcome marginal p_Y."""
    counts = np.bincount(ds.y_labels, minlength=ds.n_y)
    return MarginalY(counts / ds.n)


def group_index(ds: Dataset) -> GroupIndex:
    """Partition samples into nonempty (d, y) groups in lexicographic order."""
    keys = ds.d_labels * ds.n_y + ds.y_labels
    observed = np.unique(keys)
    remap = np.full(ds.n_d * ds.n_y, -1, dtype=np.int64)
    remap[observed] = np.arange(observed.shape[0])
    group_of = remap[keys]
    groups = tuple(_frozen(np.flatnonzero(group_of == l)) for l in range(observed.shape[0]))
    return GroupIndex(
        groups=groups,
        group_of=_frozen(group_of),
        group_d=_frozen(observed // ds.n_y),
        group_y=_frozen(observed % ds.n_y),
        n_d=ds.n_d,
        n_y=ds.n_y,
    )
