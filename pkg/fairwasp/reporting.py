"""Run manifests and fairness reports written by the command-line tools."""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from fairwasp import __version__
from fairwasp.data.dataset import Dataset, GroupIndex, MarginalY
from fairwasp.errors import EvaluationError
from fairwasp.solver.fairness import (
    ConstraintMatrix, conditional_table, demographic_disparity, fairness_violation, pairwise_violation
)

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"


def _finite(value: Optional[float]) -> Optional[float]:
    """JSON has no inf/nan; both are written as null."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class FairnessMetrics(BaseModel):
    """Fairness summary of one weight vector."""

    violation: Optional[float]
    pairwise_violation: Optional[float]
    demographic_disparity: Optional[float]
    conditionals: List[List[Optional[float]]]


class RunManifest(BaseModel):
    """Reproducibility record written next to every weights file."""

    model_config = ConfigDict(frozen=True)

    version: str = __version__
    command: str
    input_hash: str
    n: int
    d_values: List[str]
    y_values: List[str]
    config: Dict[str, Any]
    status: str
    objective: Optional[float] = None
    wasserstein: Optional[float] = None
    report: Dict[str, Any] = Field(default_factory=dict)
    before: Optional[FairnessMetrics] = None
    after: Optional[FairnessMetrics] = None
    timings: Dict[str, float] = Field(default_factory=dict)

    def to_json(self, include_timings: bool = True) -> str:
        """Deterministic JSON: sorted keys, fixed indentation."""
        payload = self.model_dump(mode="json", exclude=None if include_timings else {"timings"})
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def manifest_path(weights_path: Union[str, Path]) -> Path:
    weights_path = Path(weights_path)
    return weights_path.with_name(weights_path.name + MANIFEST_SUFFIX)


def write_manifest(manifest: RunManifest, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.to_json(), encoding="utf-8")
    logger.info(f"Manifest written to {path}")
    return path


def fairness_metrics(theta, gi: GroupIndex, t: MarginalY, epsilon: float) -> FairnessMetrics:
    """Violation, pairwise ratio, disparity and conditionals for weights theta."""
    try:
        violation = fairness_violation(theta, gi, t, epsilon)
    except EvaluationError:
        violation = None
    table = conditional_table(theta, gi, skip_empty=True)
    return FairnessMetrics(
        violation=_finite(violation),
        pairwise_violation=_finite(pairwise_violation(theta, gi)),
        demographic_disparity=_finite(demographic_disparity(theta, gi)),
        conditionals=[[_finite(v) for v in row] for row in table],
    )


class ConditionalEntry(BaseModel):
    d: str
    y: str
    weight: float
    conditional: Optional[float]
    lower: float
    upper: float


class MarginEntry(BaseModel):
    d: str
    y: str
    side: str
    margin: float


class VerifyReport(BaseModel):
    """Everything `verify` prints about a weight vector."""

    n: int
    total_weight: float
    epsilon: float
    target: List[float]
    weighted_marginal: List[float]
    conditionals: List[ConditionalEntry]
    margins: List[MarginEntry]
    violation: Optional[float]
    pairwise_violation: Optional[float]
    demographic_disparity: Optional[float]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [
            f"samples: {self.n}  total weight: {self.total_weight:g}  epsilon: {self.epsilon:g}",
            "target p(y):      " + "  ".join(f"{v:.6f}" for v in self.target),
            "weighted p(y):    " + "  ".join(f"{v:.6f}" for v in self.weighted_marginal),
            "",
            f"{'d':>10} {'y':>10} {'weight':>12} {'p(y|d)':>10} {'lower':>10} {'upper':>10}",
        ]
        for entry in self.conditionals:
            shown = "undefined" if entry.conditional is None else f"{entry.conditional:.6f}"
            lines.append(
                f"{entry.d:>10} {entry.y:>10} {entry.weight:>12g} {shown:>10} "
                f"{entry.lower:>10.6f} {entry.upper:>10.6f}"
            )
        lines.append("")
        lines.append(f"{'d':>10} {'y':>10} {'side':>6} {'margin':>14}")
        for entry in self.margins:
            lines.append(f"{entry.d:>10} {entry.y:>10} {entry.side:>6} {entry.margin:>14.6g}")
        lines.append("")
        lines.append(f"violation: {_fmt(self.violation)}")
        lines.append(f"pairwise violation: {_fmt(self.pairwise_violation)}")
        lines.append(f"demographic disparity: {_fmt(self.demographic_disparity)}")
        return "\n".join(lines) + "\n"


def _fmt(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.6g}"


def build_verify_report(ds: Dataset, gi: GroupIndex, theta, t: MarginalY, cm: ConstraintMatrix) -> VerifyReport:
    """Per-(d, y) conditionals, marginals, violations and constraint margins."""
    weights = np.asarray(theta, dtype=np.float64)
    sums = gi.group_sums(weights)
    table = conditional_table(weights, gi, skip_empty=True)
    probs = np.asarray(t.probs, dtype=np.float64)
    eps = cm.epsilon

    conditionals = []
    for l in range(gi.L):
        d, y = int(gi.group_d[l]), int(gi.group_y[l])
        conditionals.append(ConditionalEntry(
            d=str(ds.d_values[d]),
            y=str(ds.y_values[y]),
            weight=float(sums[l]),
            conditional=_finite(table[d, y]),
            lower=float(probs[y] / (1.0 + eps)),
            upper=float((1.0 + eps) * probs[y]),
        ))

    margins = [
        MarginEntry(d=str(ds.d_values[meta.d]), y=str(ds.y_values[meta.y]), side=meta.side, margin=float(value))
        for meta, value in zip(cm.row_meta, cm.margins(weights, gi))
    ]

    total = float(weights.sum())
    by_y = np.bincount(gi.group_y, weights=sums, minlength=gi.n_y)
    metrics = fairness_metrics(weights, gi, t, eps)
    return VerifyReport(
        n=ds.n,
        total_weight=total,
        epsilon=eps,
        target=probs.tolist(),
        weighted_marginal=(by_y / total).tolist() if total > 0 else [0.0] * gi.n_y,
        conditionals=conditionals,
        margins=margins,
        violation=metrics.violation,
        pairwise_violation=metrics.pairwise_violation,
        demographic_disparity=metrics.demographic_disparity,
    )
