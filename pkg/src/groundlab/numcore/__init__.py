"""Numeric core: autodiff tensors and the optimizer that trains on them."""

from .optim import OptimizerState, adamw_step, lr_at, named_grads
from .tensor import (
    Tensor,
    add,
    backward,
    concat,
    cross_entropy,
    div,
    embedding,
    exp,
    gelu,
    layer_norm,
    log,
    log_softmax,
    matmul,
    mul,
    power,
    relu,
    reshape,
    slice_axis,
    softmax,
    sub,
    swap_last2,
    take_positions,
    tanh,
    tmean,
    transpose,
    tsum,
)

__all__ = [
    "OptimizerState",
    "Tensor",
    "adamw_step",
    "add",
    "backward",
    "concat",
    "cross_entropy",
    "div",
    "embedding",
    "exp",
    "gelu",
    "layer_norm",
    "log",
    "log_softmax",
    "lr_at",
    "matmul",
    "mul",
    "named_grads",
    "power",
    "relu",
    "reshape",
    "slice_axis",
    "softmax",
    "sub",
    "swap_last2",
    "take_positions",
    "tanh",
    "tmean",
    "transpose",
    "tsum",
]
