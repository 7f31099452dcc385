"""AdamW with decoupled weight decay, plus the warmup learning-rate schedule.

The optimizer mutates parameter arrays in place and keeps first/second moment
estimates per parameter name, so a parameter dict plus an OptimizerState is
everything needed to resume training exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError
from .tensor import Tensor

Array = np.ndarray


@dataclass
class OptimizerState:
    """Per-parameter moment estimates and the shared step counter."""

    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    step: int = 0
    m: dict[str, Array] = field(default_factory=dict)
    v: dict[str, Array] = field(default_factory=dict)


def lr_at(step: int, warmup_steps: int = 5000, peak_lr: float = 1e-4) -> float:
    """Linear warmup from 0 to `peak_lr` over `warmup_steps`, then constant.

    `step` counts completed optimizer steps, so lr_at(0) == 0 and
    lr_at(warmup_steps) == peak_lr.
    """
    if step < 0:
        raise TrainingError(f"lr_at: negative step {step}")
    if warmup_steps <= 0:
        return peak_lr
    if step >= warmup_steps:
        return peak_lr
    return peak_lr * step / warmup_steps


def named_grads(
    params: dict[str, Tensor], id_grads: dict[int, Array]
) -> dict[str, Array]:
    """Re-key backward()'s id-addressed gradient map by parameter name.

    Parameters the loss never touched are simply absent from the result.
    """
    return {
        name: id_grads[id(t)] for name, t in params.items() if id(t) in id_grads
    }


def adamw_step(
    params: dict[str, Tensor],
    grads: dict[str, Array],
    state: OptimizerState,
    lr: float,
) -> None:
    """Apply one AdamW update in place.

    Weight decay is decoupled (applied to the parameter directly, scaled by
    lr, never entering the moment estimates). Parameters without an entry in
    `grads` are skipped entirely: no decay, no moment update. A non-finite
    gradient aborts the step before any parameter has been touched.
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"adamw_step: non-finite gradient for '{name}'")

    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**t
    bias2 = 1.0 - b2**t

    for name, g in grads.items():
        p = params[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / bias1
        v_hat = v / bias2
        if state.weight_decay != 0.0:
            p.data -= lr * state.weight_decay * p.data
        p.data -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
