"""Synthetic benchmark data with a feature correlated to the protected class.

D ~ Bernoulli(0.5), X1 ~ U[0, 10] when D = 1 and X1 = 0 when D = 0,
X2 ~ N(0, 25), Y = 1{X1 + X2 + noise > mean(X1 + X2)} with N(0, 1) noise.
"""
import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from fairwasp.data.dataset import Dataset
from fairwasp.errors import ConfigurationError

logger = logging.getLogger(__name__)

SYNTH_COLUMNS = ("x1", "x2", "d", "y")


def generate_synthetic(n: int, seed: int) -> Dataset:
    """Generate the synthetic scaling-study dataset.

    Args:
        n: Number of samples (at least 2)
        seed: RNG seed; equal seeds give bit-identical datasets

    Returns:
        Dataset with features (x1, x2) and binary d, y
    """
    if n < 2:
        raise ConfigurationError(f"Synthetic dataset needs n >= 2, got {n}")

    rng = np.random.default_rng(seed)
    d = rng.binomial(1, 0.5, size=n)
    x1 = rng.uniform(0.0, 10.0, size=n) * (d == 1)
    x2 = rng.normal(0.0, 5.0, size=n)
    noise = rng.normal(0.0, 1.0, size=n)
    signal = x1 + x2
    y = (signal + noise > signal.mean()).astype(np.int64)

    frame = pd.DataFrame({"x1": x1, "x2": x2, "d": d, "y": y}, columns=list(SYNTH_COLUMNS))
    logger.debug(f"Generated synthetic dataset n={n} seed={seed}, P(Y=1)={y.mean():.3f}")
    return Dataset.from_arrays(
        np.column_stack([x1, x2]),
        d,
        y,
        d_values=(0, 1),
        y_values=(0, 1),
        feature_names=("x1", "x2"),
        d_column="d",
        y_column="y",
        frame=frame,
    )


def write_dataset_csv(ds: Dataset, path: Union[str, Path]) -> Path:
    """Write a dataset with its input schema."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ds.to_frame().to_csv(path, index=False, float_format="%.17g")
    return path
