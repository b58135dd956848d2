"""Screening and regression metrics, plus compound-embedding export.

Rankings honor a per-task hit direction: docking-style scores rank ascending
(lower is better), potency-style scores descending.  Ties are broken by
original index, so results are deterministic for any input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import HIT_DIRECTIONS, TaskDataset
from .model import GraphBatch, ModelParams, gin_forward


class MetricError(ValueError):
    """Inputs violate a metric's preconditions."""


def _finite_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise MetricError(f"{name} must be 1-d")
    if not np.all(np.isfinite(arr)):
        raise MetricError(f"{name} contains non-finite values")
    return arr


def pchembl(ic50_molar):
    """Negative base-10 log of a molar activity value (e.g. 1e-5 M -> 5.0)."""
    arr = np.asarray(ic50_molar, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise MetricError("activity values must be positive and finite")
    out = -np.log10(arr)
    return float(out) if np.isscalar(ic50_molar) or arr.ndim == 0 else out


def mse(y, yhat) -> float:
    y = _finite_vector(y, "y")
    yhat = _finite_vector(yhat, "yhat")
    if y.shape != yhat.shape:
        raise MetricError("length mismatch")
    if y.size < 2:
        raise MetricError("need at least 2 samples")
    return float(np.mean((y - yhat) ** 2))


def pearson(y, yhat) -> float:
    y = _finite_vector(y, "y")
    yhat = _finite_vector(yhat, "yhat")
    if y.shape != yhat.shape:
        raise MetricError("length mismatch")
    if y.size < 2:
        raise MetricError("need at least 2 samples")
    dy = y - y.mean()
    dz = yhat - yhat.mean()
    denom = math.sqrt(float(np.sum(dy * dy)) * float(np.sum(dz * dz)))
    if denom == 0.0:
        raise MetricError("zero variance")
    return float(np.sum(dy * dz)) / denom


def concordance_index(y, yhat) -> float:
    """Fraction of strictly ordered true pairs whose predictions are ordered
    the same way; tied predictions earn no credit."""
    y = _finite_vector(y, "y")
    yhat = _finite_vector(yhat, "yhat")
    if y.shape != yhat.shape:
        raise MetricError("length mismatch")
    if y.size < 2:
        raise MetricError("need at least 2 samples")
    true_greater = y[:, None] > y[None, :]
    denom = int(true_greater.sum())
    if denom == 0:
        raise MetricError("all true values are equal")
    pred_greater = yhat[:, None] > yhat[None, :]
    return int(np.sum(true_greater & pred_greater)) / denom


@dataclass
class ScreenResult:
    """True and predicted scores for one screened task."""

    true_scores: np.ndarray
    predicted_scores: np.ndarray
    hit_direction: str
    k: int
    cutoff_fraction: float

    def __post_init__(self):
        self.true_scores = _finite_vector(self.true_scores, "true_scores")
        self.predicted_scores = _finite_vector(
            self.predicted_scores, "predicted_scores"
        )
        n = self.true_scores.size
        if self.predicted_scores.size != n:
            raise MetricError("score length mismatch")
        if self.hit_direction not in HIT_DIRECTIONS:
            raise MetricError(f"hit direction must be one of {HIT_DIRECTIONS}")
        if not 0 < self.k <= n:
            raise MetricError(f"k={self.k} out of range for n={n}")
        if not 0.0 < self.cutoff_fraction < 1.0:
            raise MetricError("cutoff_fraction must be in (0, 1)")


def rank_best_first(scores: np.ndarray, hit_direction: str) -> np.ndarray:
    """Indices sorted best-score-first with stable index tie-breaks."""
    scores = np.asarray(scores, dtype=np.float64)
    if hit_direction == "lower_is_better":
        return np.argsort(scores, kind="stable")
    return np.argsort(-scores, kind="stable")


def recall_at(result: ScreenResult) -> float:
    """Fraction of the k best-by-true-score compounds recovered inside the
    top ceil(cutoff_fraction * n) predictions."""
    n = result.true_scores.size
    cut = math.ceil(result.cutoff_fraction * n)
    true_hits = set(rank_best_first(result.true_scores, result.hit_direction)[: result.k])
    predicted = set(rank_best_first(result.predicted_scores, result.hit_direction)[:cut])
    return len(true_hits & predicted) / result.k


def export_embeddings(
    params: ModelParams, ds: TaskDataset, batch_size: int = 256
) -> tuple[np.ndarray, list[str]]:
    """Eval-mode mean-pooled compound embeddings, one row per compound."""
    rows = []
    for start in range(0, ds.n_compounds, batch_size):
        graphs = ds.graphs[start : start + batch_size]
        batch = GraphBatch.from_graphs(graphs)
        rows.append(gin_forward(batch, params, train=False).data)
    return np.concatenate(rows, axis=0), list(ds.smiles)
