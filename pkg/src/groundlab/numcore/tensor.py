"""Dense float64 tensors with reverse-mode automatic differentiation.

Every operation on a Tensor whose inputs require gradients records its
parents and a backward closure; `backward(loss)` replays those closures in
reverse topological order and returns gradients for the requiring leaves.
Graphs are throwaway: build one per forward pass, differentiate, discard.

All arithmetic is performed in float64 regardless of input dtype. Integer
payloads (token ids, gather indices) travel as plain numpy arrays and never
enter the graph.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ContractError, ShapeError

Array = np.ndarray

_GELU_C = math.sqrt(2.0 / math.pi)


def _as_f64(x) -> Array:
    return np.asarray(x, dtype=np.float64)


class Tensor:
    """A numpy array plus the bookkeeping needed for reverse-mode autodiff.

    `requires_grad` on a leaf marks it as a trainable parameter; on an
    interior node it is derived from the parents. `grad` is populated by
    `backward` and is zeroed at the start of every backward pass, so
    differentiating the same graph twice yields identical results.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bwd")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_f64(data)
        self.grad: Array | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._bwd = None

    # -- construction of graph nodes -------------------------------------

    @staticmethod
    def _node(data: Array, parents: tuple["Tensor", ...], bwd) -> "Tensor":
        out = Tensor.__new__(Tensor)
        out.data = data
        out.grad = None
        out.requires_grad = any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._parents = parents
            out._bwd = bwd
        else:
            out._parents = ()
            out._bwd = None
        return out

    # -- basic properties -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    # -- operator sugar ---------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, exponent):
        return power(self, exponent)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum `grad` over axes that were broadcast so it matches `shape`."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _accum(t: Tensor, g: Array) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = g.copy() if g.base is not None or not g.flags.owndata else g
    else:
        t.grad = t.grad + g


# -- elementwise arithmetic ------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    data = a.data + b.data

    def bwd(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))

    return Tensor._node(data, (a, b), bwd)


def sub(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    data = a.data - b.data

    def bwd(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(-g, b.data.shape))

    return Tensor._node(data, (a, b), bwd)


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    data = a.data * b.data

    def bwd(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return Tensor._node(data, (a, b), bwd)


def div(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    data = a.data / b.data

    def bwd(g):
        _accum(a, _unbroadcast(g / b.data, a.data.shape))
        _accum(b, _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return Tensor._node(data, (a, b), bwd)


def power(a, exponent: float) -> Tensor:
    a = _wrap(a)
    if isinstance(exponent, Tensor):
        raise ContractError("power: exponent must be a plain number")
    p = float(exponent)
    data = a.data**p

    def bwd(g):
        _accum(a, g * p * a.data ** (p - 1.0))

    return Tensor._node(data, (a,), bwd)


def exp(a) -> Tensor:
    a = _wrap(a)
    data = np.exp(a.data)

    def bwd(g):
        _accum(a, g * data)

    return Tensor._node(data, (a,), bwd)


def log(a) -> Tensor:
    a = _wrap(a)
    data = np.log(a.data)

    def bwd(g):
        _accum(a, g / a.data)

    return Tensor._node(data, (a,), bwd)


def tanh(a) -> Tensor:
    a = _wrap(a)
    data = np.tanh(a.data)

    def bwd(g):
        _accum(a, g * (1.0 - data * data))

    return Tensor._node(data, (a,), bwd)


def relu(a) -> Tensor:
    a = _wrap(a)
    data = np.maximum(a.data, 0.0)

    def bwd(g):
        _accum(a, g * (a.data > 0.0))

    return Tensor._node(data, (a,), bwd)


def gelu(a) -> Tensor:
    """GELU via the tanh approximation used by GPT-2."""
    a = _wrap(a)
    x = a.data
    inner = _GELU_C * (x + 0.044715 * x**3)
    t = np.tanh(inner)
    data = 0.5 * x * (1.0 + t)

    def bwd(g):
        d_inner = _GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
        local = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * d_inner
        _accum(a, g * local)

    return Tensor._node(data, (a,), bwd)


# -- shape manipulation ------------------------------------------------------


def reshape(a, shape) -> Tensor:
    a = _wrap(a)
    data = a.data.reshape(shape)

    def bwd(g):
        _accum(a, g.reshape(a.data.shape))

    return Tensor._node(data, (a,), bwd)


def transpose(a, axes=None) -> Tensor:
    a = _wrap(a)
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    data = a.data.transpose(axes)

    def bwd(g):
        _accum(a, g.transpose(inv))

    return Tensor._node(data, (a,), bwd)


def swap_last2(a) -> Tensor:
    a = _wrap(a)
    axes = list(range(a.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return transpose(a, axes)


def concat(tensors, axis: int = 0) -> Tensor:
    ts = [_wrap(t) for t in tensors]
    data = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.data.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        for t, piece in zip(ts, np.split(g, splits, axis=axis)):
            _accum(t, piece)

    return Tensor._node(data, tuple(ts), bwd)


def slice_axis(a, axis: int, start: int, stop: int) -> Tensor:
    a = _wrap(a)
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)
    data = a.data[index]

    def bwd(g):
        full = np.zeros_like(a.data)
        full[index] = g
        _accum(a, full)

    return Tensor._node(data, (a,), bwd)


# -- reductions --------------------------------------------------------------


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, a.data.shape).copy())
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.data.shape).copy())

    return Tensor._node(data, (a,), bwd)


def tmean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    if axis is None:
        n = a.size
    else:
        n = a.data.shape[axis] if isinstance(axis, int) else int(
            np.prod([a.data.shape[ax] for ax in axis])
        )
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


# -- linear algebra ----------------------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(
            f"matmul: operands must have >= 2 dims, got {a.shape} x {b.shape}"
        )
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(
            f"matmul: inner dimensions disagree: {a.shape} x {b.shape}"
        )
    data = a.data @ b.data

    def bwd(g):
        ga = g @ b.data.swapaxes(-1, -2)
        gb = a.data.swapaxes(-1, -2) @ g
        _accum(a, _unbroadcast(ga, a.data.shape))
        _accum(b, _unbroadcast(gb, b.data.shape))

    return Tensor._node(data, (a, b), bwd)


# -- nonlinear blocks --------------------------------------------------------


def softmax(a, axis: int = -1) -> Tensor:
    """Numerically stable softmax along `axis` (max subtraction)."""
    a = _wrap(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        dot = (g * data).sum(axis=axis, keepdims=True)
        _accum(a, data * (g - dot))

    return Tensor._node(data, (a,), bwd)


def log_softmax(a, axis: int = -1) -> Tensor:
    a = _wrap(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    data = shifted - lse

    def bwd(g):
        soft = np.exp(data)
        _accum(a, g - soft * g.sum(axis=axis, keepdims=True))

    return Tensor._node(data, (a,), bwd)


def layer_norm(a, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean, unit variance (no affine)."""
    a = _wrap(a)
    mu = a.data.mean(axis=-1, keepdims=True)
    var = a.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    y = (a.data - mu) * inv

    def bwd(g):
        gm = g.mean(axis=-1, keepdims=True)
        gym = (g * y).mean(axis=-1, keepdims=True)
        _accum(a, inv * (g - gm - y * gym))

    return Tensor._node(y, (a,), bwd)


# -- gathers -----------------------------------------------------------------


def embedding(weight: Tensor, ids: Array) -> Tensor:
    """Row gather: result[..., :] = weight[ids[...], :]."""
    ids = np.asarray(ids)
    if not np.issubdtype(ids.dtype, np.integer):
        raise ContractError("embedding: ids must be integers")
    data = weight.data[ids]

    def bwd(g):
        if not weight.requires_grad:
            return
        gw = np.zeros_like(weight.data)
        np.add.at(gw, ids.reshape(-1), g.reshape(-1, weight.data.shape[-1]))
        _accum(weight, gw)

    return Tensor._node(data, (weight,), bwd)


def take_positions(a, idx: Array) -> Tensor:
    """Gather one position per batch row: a[B, T, ...] -> a[B, idx[B], ...]."""
    a = _wrap(a)
    idx = np.asarray(idx)
    rows = np.arange(a.shape[0])
    data = a.data[rows, idx]

    def bwd(g):
        full = np.zeros_like(a.data)
        full[rows, idx] = g
        _accum(a, full)

    return Tensor._node(data, (a,), bwd)


# -- losses ------------------------------------------------------------------


def cross_entropy(logits, targets: Array, mask: Array | None = None) -> Tensor:
    """Mean negative log-likelihood of `targets` under softmax(logits).

    logits: [N, V]; targets: int [N]; mask: optional float/bool [N] selecting
    the positions that count. Masking every position is a contract error.
    """
    logits = _wrap(logits)
    targets = np.asarray(targets)
    if logits.ndim != 2:
        raise ShapeError(f"cross_entropy: logits must be [N, V], got {logits.shape}")
    n, v = logits.shape
    if targets.shape != (n,):
        raise ShapeError(
            f"cross_entropy: targets shape {targets.shape} does not match N={n}"
        )
    if mask is None:
        m = np.ones(n)
    else:
        m = np.asarray(mask, dtype=np.float64)
    total = m.sum()
    if total <= 0.0:
        raise ContractError("cross_entropy: every position is masked out")

    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - lse
    rows = np.arange(n)
    data = np.asarray(-(logp[rows, targets] * m).sum() / total)

    def bwd(g):
        soft = np.exp(logp)
        grad = soft.copy()
        grad[rows, targets] -= 1.0
        grad *= (m / total)[:, None]
        _accum(logits, grad * g)

    return Tensor._node(data, (logits,), bwd)


# -- backward engine ---------------------------------------------------------


def _topo_order(root: Tensor) -> list[Tensor]:
    """Iterative post-order DFS (graphs can be deep)."""
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> dict[int, Array]:
    """Accumulate d(loss)/d(leaf) for every requires_grad leaf.

    The loss must be scalar. Gradient accumulators of every reachable node
    are zeroed first, so repeated calls on one graph are idempotent. Returns
    a map from id(leaf tensor) to its gradient array; the same arrays are
    exposed on each leaf's `.grad`.
    """
    if not isinstance(loss, Tensor):
        raise ContractError("backward: loss must be a Tensor")
    if loss.data.size != 1:
        raise ContractError(
            f"backward: loss must be scalar, got shape {loss.data.shape}"
        )
    order = _topo_order(loss)
    for node in order:
        node.grad = None
    loss.grad = np.ones_like(loss.data)
    grads: dict[int, Array] = {}
    for node in reversed(order):
        if node._bwd is not None and node.grad is not None:
            node._bwd(node.grad)
        elif node.requires_grad and not node._parents:
            if node.grad is None:
                node.grad = np.zeros_like(node.data)
            grads[id(node)] = node.grad
    return grads
