"""Differentiable primitives over :class:`~molscreen.engine.tensor.Tensor`.

Every op takes an optional ``tape``; with ``tape=None`` it is a plain numpy
forward pass.  Only the operations the graph model needs are provided; there
is no general broadcasting beyond bias-style row vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tape, Tensor


def _result(data, inputs, backward_fn, tape: Tape | None) -> Tensor:
    out = Tensor(data)
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(out, inputs, backward_fn)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def matmul(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("matmul expects 2-D operands")
    out = a.data @ b.data

    def backward(up):
        return up @ b.data.T, a.data.T @ up

    return _result(out, (a, b), backward, tape)


def add(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    out = a.data + b.data

    def backward(up):
        return _unbroadcast(up, a.shape), _unbroadcast(up, b.shape)

    return _result(out, (a, b), backward, tape)


def scale(x: Tensor, factor: float, tape: Tape | None = None) -> Tensor:
    factor = float(factor)

    def backward(up):
        return (up * factor,)

    return _result(x.data * factor, (x,), backward, tape)


def relu(x: Tensor, tape: Tape | None = None) -> Tensor:
    keep = x.data > 0

    def backward(up):
        return (up * keep,)

    return _result(np.where(keep, x.data, 0.0), (x,), backward, tape)


def dropout(
    x: Tensor,
    rate: float,
    rng: np.random.Generator | None,
    train: bool,
    tape: Tape | None = None,
) -> Tensor:
    """Inverted dropout: zero with probability ``rate``, scale by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("train-mode dropout needs a random stream")
    keep = rng.random(x.shape) >= rate
    factor = keep / (1.0 - rate)

    def backward(up):
        return (up * factor,)

    return _result(x.data * factor, (x,), backward, tape)


def embedding_lookup(
    table: Tensor, indices: np.ndarray, tape: Tape | None = None
) -> Tensor:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= table.shape[0]):
        raise IndexError("embedding index out of range")
    out = table.data[indices]

    def backward(up):
        grad = np.zeros_like(table.data)
        np.add.at(grad, indices, up)
        return (grad,)

    return _result(out, (table,), backward, tape)


def _segment_ids(values: Tensor, segment_ids, num_segments: int) -> np.ndarray:
    ids = np.asarray(segment_ids, dtype=np.int64)
    if ids.shape != (values.shape[0],):
        raise ValueError("segment ids must be one per row of values")
    if ids.size and (ids.min() < 0 or ids.max() >= num_segments):
        raise ValueError("segment id out of range")
    return ids


def _segment_totals(data: np.ndarray, ids: np.ndarray, num_segments: int):
    counts = np.bincount(ids, minlength=num_segments)
    totals = np.zeros((num_segments,) + data.shape[1:], dtype=data.dtype)
    if ids.size:
        if np.all(ids[:-1] <= ids[1:]):
            ordered, sorted_ids = data, ids
        else:
            order = np.argsort(ids, kind="stable")
            ordered, sorted_ids = data[order], ids[order]
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        present = counts > 0
        totals[present] = np.add.reduceat(ordered, starts[present], axis=0)
    return totals, counts


def segment_sum(
    values: Tensor, segment_ids, num_segments: int, tape: Tape | None = None
) -> Tensor:
    ids = _segment_ids(values, segment_ids, num_segments)
    totals, _ = _segment_totals(values.data, ids, num_segments)

    def backward(up):
        return (up[ids],)

    return _result(totals, (values,), backward, tape)


def segment_mean(
    values: Tensor, segment_ids, num_segments: int, tape: Tape | None = None
) -> Tensor:
    ids = _segment_ids(values, segment_ids, num_segments)
    totals, counts = _segment_totals(values.data, ids, num_segments)
    divisor = np.maximum(counts, 1).astype(np.float64)
    means = totals / divisor[:, None] if totals.ndim == 2 else totals / divisor

    def backward(up):
        scaled = up / divisor[:, None] if up.ndim == 2 else up / divisor
        return (scaled[ids],)

    return _result(means, (values,), backward, tape)


@dataclass
class BatchNormState:
    """Per-feature running statistics for batch normalization."""

    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.1
    eps: float = 1e-5

    @classmethod
    def initial(cls, num_features: int, momentum: float = 0.1, eps: float = 1e-5):
        return cls(
            running_mean=np.zeros(num_features),
            running_var=np.ones(num_features),
            momentum=momentum,
            eps=eps,
        )

    def copy(self) -> "BatchNormState":
        return BatchNormState(
            running_mean=self.running_mean.copy(),
            running_var=self.running_var.copy(),
            momentum=self.momentum,
            eps=self.eps,
        )


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    state: BatchNormState,
    train: bool,
    update_running: bool = True,
    tape: Tape | None = None,
) -> Tensor:
    """Normalize each feature over the batch (train) or by running stats (eval)."""
    if train:
        if x.shape[0] < 2:
            raise ValueError("train-mode batch norm needs at least 2 rows")
        mean = x.data.mean(axis=0)
        var = x.data.var(axis=0)
        if update_running:
            m = state.momentum
            state.running_mean *= 1.0 - m
            state.running_mean += m * mean
            state.running_var *= 1.0 - m
            state.running_var += m * var
    else:
        mean = state.running_mean
        var = state.running_var
    inv_std = 1.0 / np.sqrt(var + state.eps)
    x_hat = (x.data - mean) * inv_std
    out = gamma.data * x_hat + beta.data

    if train:

        def backward(up):
            n = x.shape[0]
            d_hat = up * gamma.data
            d_x = (
                inv_std
                / n
                * (
                    n * d_hat
                    - d_hat.sum(axis=0)
                    - x_hat * (d_hat * x_hat).sum(axis=0)
                )
            )
            return d_x, (up * x_hat).sum(axis=0), up.sum(axis=0)

    else:

        def backward(up):
            return (
                up * gamma.data * inv_std,
                (up * x_hat).sum(axis=0),
                up.sum(axis=0),
            )

    return _result(out, (x, gamma, beta), backward, tape)


def mse_loss(pred: Tensor, target, tape: Tape | None = None) -> Tensor:
    target = np.asarray(target, dtype=np.float64)
    if target.shape != pred.shape:
        raise ValueError("prediction and target shapes differ")
    diff = pred.data - target
    out = np.mean(diff * diff)

    def backward(up):
        return (up * 2.0 * diff / diff.size,)

    return _result(out, (pred,), backward, tape)


def masked_sse(pred: Tensor, target, mask, tape: Tape | None = None) -> Tensor:
    """Sum of squared errors over entries where ``mask`` is nonzero.

    Masked entries contribute exactly zero to both the value and the
    gradient.
    """
    target = np.asarray(target, dtype=np.float64)
    mask = np.asarray(mask) != 0
    if target.shape != pred.shape or mask.shape != pred.shape:
        raise ValueError("prediction, target, and mask shapes differ")
    diff = np.where(mask, pred.data - target, 0.0)
    out = np.sum(diff * diff)

    def backward(up):
        return (up * 2.0 * diff,)

    return _result(out, (pred,), backward, tape)


def concat_columns(tensors, tape: Tape | None = None) -> Tensor:
    tensors = list(tensors)
    widths = [t.shape[1] for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=1)
    offsets = np.concatenate(([0], np.cumsum(widths)))

    def backward(up):
        return tuple(
            up[:, offsets[i] : offsets[i + 1]] for i in range(len(tensors))
        )

    return _result(out, tuple(tensors), backward, tape)
