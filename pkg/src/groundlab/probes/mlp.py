"""Single-hidden-layer MLP classifier built on the tensor engine.

100 rectified hidden units, softmax output, adaptive-moment updates at
lr 1e-3, mini-batches of min(200, n), at most 200 epochs with early stop
once the epoch loss stops improving by more than 1e-4 for 10 epochs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from ..errors import ContractError
from ..seeding import substream

Array = np.ndarray

HIDDEN = 100
LR = 1e-3
MAX_EPOCHS = 200
BATCH_CAP = 200
TOL = 1e-4
PATIENCE = 10


@dataclass
class MLPProbe:
    classes: list
    w1: Array
    b1: Array
    w2: Array
    b2: Array

    def decision_scores(self, X) -> Array:
        h = np.maximum(np.asarray(X, dtype=np.float64) @ self.w1 + self.b1, 0.0)
        return h @ self.w2 + self.b2

    def predict(self, X) -> list:
        return [self.classes[i] for i in self.decision_scores(X).argmax(axis=1)]


def fit_mlp(X, labels, seed: int = 0) -> MLPProbe:
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ContractError(f"fit_mlp: need >= 2 classes, got {classes}")
    if X.shape[0] != len(labels):
        raise ContractError(f"fit_mlp: {X.shape[0]} rows vs {len(labels)} labels")
    index = {c: i for i, c in enumerate(classes)}
    y = np.asarray([index[lab] for lab in labels])
    n, d = X.shape
    k = len(classes)
    rng = substream(seed, "probes:mlp")

    def glorot(fan_in, fan_out, shape):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, shape)

    params = {
        "w1": nc.Tensor(glorot(d, HIDDEN, (d, HIDDEN)), requires_grad=True),
        "b1": nc.Tensor(np.zeros(HIDDEN), requires_grad=True),
        "w2": nc.Tensor(glorot(HIDDEN, k, (HIDDEN, k)), requires_grad=True),
        "b2": nc.Tensor(np.zeros(k), requires_grad=True),
    }
    opt = nc.OptimizerState(weight_decay=0.0)
    batch = min(BATCH_CAP, n)
    best = np.inf
    stale = 0
    for _ in range(MAX_EPOCHS):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            xb = nc.Tensor(X[rows])
            h = nc.relu(nc.add(nc.matmul(xb, params["w1"]), params["b1"]))
            logits = nc.add(nc.matmul(h, params["w2"]), params["b2"])
            loss = nc.cross_entropy(logits, y[rows])
            grads = nc.backward(loss)
            named = {nm: grads[id(p)] for nm, p in params.items()}
            nc.adamw_step(params, named, opt, lr=LR)
            losses.append(loss.data.item())
        epoch_loss = float(np.mean(losses))
        if epoch_loss < best - TOL:
            best = epoch_loss
            stale = 0
        else:
            stale += 1
            if stale >= PATIENCE:
                break
    return MLPProbe(
        classes=classes,
        w1=params["w1"].data,
        b1=params["b1"].data,
        w2=params["w2"].data,
        b2=params["b2"].data,
    )
