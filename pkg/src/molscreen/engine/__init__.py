"""Tape-based autodiff engine: tensors, primitives, Adam, and checks."""

from . import ops
from .gradcheck import grad_check
from .ops import BatchNormState
from .optim import AdamState, NonFiniteGradientError, adam_step
from .rng import rng_stream
from .tensor import Tape, Tensor

__all__ = [
    "AdamState",
    "BatchNormState",
    "NonFiniteGradientError",
    "Tape",
    "Tensor",
    "adam_step",
    "grad_check",
    "ops",
    "rng_stream",
]
