"""Estimator-style wrappers around the training pipeline.

`GINRegressor` (single target) and `MultiTaskGINRegressor` (sparse label
matrix) follow the familiar fit/predict/transform protocol: constructors
only store hyperparameters, `fit` learns state into trailing-underscore
attributes, and `get_params`/`set_params` expose the hyperparameters for
cloning and grid sweeps.  No external ML framework is required.
"""

from __future__ import annotations

import inspect

import numpy as np

from .data import TaskDataset
from .featurize import DEFAULT_SCHEMA
from .metrics import export_embeddings
from .model import GraphBatch, predict as model_predict
from .train import TrainConfig, train


class NotFittedError(RuntimeError):
    """Raised when predict/transform is called before fit."""


def _as_smiles_list(X) -> list[str]:
    if isinstance(X, str):
        raise TypeError("X must be a sequence of SMILES strings, not a single string")
    smiles = list(X)
    if not smiles:
        raise ValueError("X must contain at least one SMILES string")
    for s in smiles:
        if not isinstance(s, str):
            raise TypeError(f"X entries must be strings, got {type(s).__name__}")
    return smiles


def _as_label_matrix(y, n_samples: int) -> np.ndarray:
    labels = np.asarray(y, dtype=np.float64)
    if labels.ndim == 1:
        labels = labels.reshape(-1, 1)
    if labels.ndim != 2:
        raise ValueError(f"y must be 1-d or 2-d, got shape {labels.shape}")
    if labels.shape[0] != n_samples:
        raise ValueError(
            f"y has {labels.shape[0]} rows but X has {n_samples} compounds"
        )
    return labels


class MultiTaskGINRegressor:
    """Multi-task graph regressor with a shared encoder and per-task heads.

    Parameters mirror :class:`molscreen.train.TrainConfig`.  `fit` accepts a
    label matrix with NaN marking unlabeled (compound, task) cells; every
    compound must carry at least one label.
    """

    def __init__(
        self,
        *,
        embed_dim: int = 256,
        n_layers: int = 8,
        head_hidden: int = 256,
        dropout: float = 0.2,
        lr: float = 0.001,
        batch_size: int = 128,
        val_fraction: float = 0.2,
        min_epochs: int = 100,
        patience: int = 50,
        max_epochs: int = 1000,
        seed: int = 0,
    ):
        self.embed_dim = embed_dim
        self.n_layers = n_layers
        self.head_hidden = head_hidden
        self.dropout = dropout
        self.lr = lr
        self.batch_size = batch_size
        self.val_fraction = val_fraction
        self.min_epochs = min_epochs
        self.patience = patience
        self.max_epochs = max_epochs
        self.seed = seed

    # ------------------------------------------------------------------
    # parameter protocol
    # ------------------------------------------------------------------
    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "MultiTaskGINRegressor":
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"unknown parameter {name!r}; valid parameters: {sorted(valid)}"
                )
            setattr(self, name, value)
        return self

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            lr=self.lr,
            batch_size=self.batch_size,
            dropout=self.dropout,
            embed_dim=self.embed_dim,
            n_layers=self.n_layers,
            head_hidden=self.head_hidden,
            val_fraction=self.val_fraction,
            min_epochs=self.min_epochs,
            patience=self.patience,
            max_epochs=self.max_epochs,
            seed=self.seed,
        )

    # ------------------------------------------------------------------
    # lifecycle
    # ------------------------------------------------------------------
    def fit(self, X, y, *, task_names=None, hit_directions=None) -> "MultiTaskGINRegressor":
        smiles = _as_smiles_list(X)
        labels = _as_label_matrix(y, len(smiles))
        n_tasks = labels.shape[1]
        if task_names is None:
            task_names = [f"task{t}" for t in range(n_tasks)]
        if hit_directions is None:
            hit_directions = ["lower_is_better"] * n_tasks
        ds = TaskDataset.from_smiles(
            smiles,
            labels,
            task_names=list(task_names),
            hit_directions=list(hit_directions),
            schema=DEFAULT_SCHEMA,
        )
        params, log = train(ds, self._train_config())
        self.params_ = params
        self.log_ = log
        self.task_names_ = list(task_names)
        self.hit_directions_ = list(hit_directions)
        self.schema_ = ds.schema
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError(
                f"{type(self).__name__} is not fitted yet; call fit() first"
            )

    def _featurize(self, X) -> tuple[list[str], list]:
        from .featurize import featurize_smiles

        smiles = _as_smiles_list(X)
        graphs = [featurize_smiles(s, self.schema_) for s in smiles]
        return smiles, graphs

    def predict(self, X, *, tasks=None, batch_size: int = 256) -> np.ndarray:
        """Predicted scores, shape (n_compounds, n_tasks_requested)."""
        self._check_fitted()
        _, graphs = self._featurize(X)
        task_indices = list(tasks) if tasks is not None else None
        chunks = []
        for start in range(0, len(graphs), batch_size):
            batch = GraphBatch.from_graphs(graphs[start : start + batch_size])
            chunks.append(model_predict(batch, self.params_, task_indices))
        return np.concatenate(chunks, axis=0)

    def transform(self, X, *, batch_size: int = 256) -> np.ndarray:
        """Mean-pooled graph embeddings from the shared encoder, shape (n, embed_dim)."""
        self._check_fitted()
        smiles, graphs = self._featurize(X)
        ds = TaskDataset(
            smiles=smiles,
            graphs=graphs,
            labels=np.zeros((len(smiles), len(self.task_names_))),
            task_names=self.task_names_,
            hit_directions=self.hit_directions_,
            schema=self.schema_,
        )
        matrix, _ = export_embeddings(self.params_, ds, batch_size=batch_size)
        return matrix

    def fit_transform(self, X, y, **fit_kwargs) -> np.ndarray:
        return self.fit(X, y, **fit_kwargs).transform(X)


class GINRegressor(MultiTaskGINRegressor):
    """Single-target convenience wrapper: 1-d y in, 1-d predictions out."""

    def fit(self, X, y, *, task_name: str = "task0", hit_direction: str = "lower_is_better"):
        labels = np.asarray(y, dtype=np.float64)
        if labels.ndim != 1:
            raise ValueError(f"y must be 1-d for {type(self).__name__}, got shape {labels.shape}")
        return super().fit(
            X, labels, task_names=[task_name], hit_directions=[hit_direction]
        )

    def predict(self, X, *, batch_size: int = 256) -> np.ndarray:
        return super().predict(X, batch_size=batch_size)[:, 0]
