"""Reverse-mode autodiff over dense float64 numpy arrays.

A Tensor wraps an ndarray; every op that touches a grad-requiring input
records its parents and a closure producing the parents' gradient
contributions. ``backward`` runs a topological sweep, keeping the running
gradients in a side table so repeated calls accumulate into ``.grad``
without corrupting propagation.

Blocked attention positions receive a -1e30 additive bias; after the
max-subtraction in softmax their weight underflows to exactly 0.0, which
is what makes the decoder causality guarantee bit-exact.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..errors import (
    AllIgnored,
    FullyMaskedRow,
    NotScalar,
    ShapeMismatch,
    TargetOutOfRange,
)

MASK_BIAS = -1e30


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: tuple = (),
        _backward: Callable | None = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, -1.0)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    if any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, _parents=tuple(parents), _backward=backward)
    return Tensor(data)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g.reshape(shape)


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data + b.data

    def bwd(g):
        return (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape))

    return _make(out, (a, b), bwd)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data - b.data

    def bwd(g):
        return (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape))

    return _make(out, (a, b), bwd)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data * b.data

    def bwd(g):
        return (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        )

    return _make(out, (a, b), bwd)


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeMismatch("matmul needs >=2-d operands")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ShapeMismatch(
            f"inner dimensions disagree: {a.data.shape} @ {b.data.shape}"
        )
    out = np.matmul(a.data, b.data)

    def bwd(g):
        ga = np.matmul(g, b.data.swapaxes(-1, -2))
        gb = np.matmul(a.data.swapaxes(-1, -2), g)
        return (_unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape))

    return _make(out, (a, b), bwd)


def reshape(a: Tensor, shape) -> Tensor:
    a = _as_tensor(a)
    out = a.data.reshape(shape)

    def bwd(g):
        return (g.reshape(a.data.shape),)

    return _make(out, (a,), bwd)


def transpose(a: Tensor, axes) -> Tensor:
    a = _as_tensor(a)
    axes = tuple(ax % a.data.ndim for ax in axes)
    out = a.data.transpose(axes)
    inv = np.argsort(axes)

    def bwd(g):
        return (g.transpose(inv),)

    return _make(out, (a,), bwd)


def tensor_sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        gg = g
        if axis is not None and not keepdims:
            gg = np.expand_dims(gg, axis)
        return (np.broadcast_to(gg, a.data.shape).copy(),)

    return _make(out, (a,), bwd)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    n = a.data.size if axis is None else a.data.shape[axis]
    return mul(tensor_sum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def relu(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    out = np.maximum(a.data, 0.0)

    def bwd(g):
        return (g * (a.data > 0.0),)

    return _make(out, (a,), bwd)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted softmax; gradient uses y * (g - sum(g*y))."""
    a = _as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        dot = (g * y).sum(axis=axis, keepdims=True)
        return (y * (g - dot),)

    return _make(y, (a,), bwd)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then affine."""
    x, gain, bias = _as_tensor(x), _as_tensor(gain), _as_tensor(bias)
    d = x.data.shape[-1]
    if gain.data.shape != (d,) or bias.data.shape != (d,):
        raise ShapeMismatch("gain/bias must match the last axis")
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv_std
    out = xhat * gain.data + bias.data

    def bwd(g):
        dgain = (g * xhat).sum(axis=tuple(range(g.ndim - 1)))
        dbias = g.sum(axis=tuple(range(g.ndim - 1)))
        dxhat = g * gain.data
        dx = inv_std * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return (dx, dgain, dbias)

    return _make(out, (x, gain, bias), bwd)


def embedding_lookup(weight: Tensor, ids: np.ndarray) -> Tensor:
    """Row gather from an embedding table; scatter-add on backward."""
    weight = _as_tensor(weight)
    ids = np.asarray(ids, dtype=np.int64)
    out = weight.data[ids]

    def bwd(g):
        dw = np.zeros_like(weight.data)
        np.add.at(dw, ids, g)
        return (dw,)

    return _make(out, (weight,), bwd)


def dropout(x: Tensor, rate: float, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout; identity when rng is None (eval) or rate is 0."""
    if rng is None or rate <= 0.0:
        return _as_tensor(x)
    x = _as_tensor(x)
    keep = (rng.random(x.data.shape) >= rate).astype(np.float64) / (1.0 - rate)
    out = x.data * keep

    def bwd(g):
        return (g * keep,)

    return _make(out, (x,), bwd)


def cross_entropy(
    logits: Tensor, targets: Sequence[int], ignore_id: int | None = None
) -> Tensor:
    """Mean negative log-softmax probability over non-ignored positions."""
    logits = _as_tensor(logits)
    if logits.data.ndim != 2:
        raise ShapeMismatch("logits must be (batch, classes)")
    t = np.asarray(targets, dtype=np.int64)
    if t.shape != (logits.data.shape[0],):
        raise ShapeMismatch("one target per logits row required")
    n_classes = logits.data.shape[1]
    active = np.ones(len(t), dtype=bool) if ignore_id is None else t != ignore_id
    if not active.any():
        raise AllIgnored("every target position is ignored")
    if (t[active] < 0).any() or (t[active] >= n_classes).any():
        raise TargetOutOfRange(f"targets must lie in [0, {n_classes})")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(len(t))
    nll = lse - shifted[rows, np.where(active, t, 0)]
    n_active = int(active.sum())
    loss = nll[active].sum() / n_active

    def bwd(g):
        probs = np.exp(shifted - lse[:, None])
        probs[rows[active], t[active]] -= 1.0
        probs[~active] = 0.0
        return (float(g) * probs / n_active,)

    return _make(np.float64(loss), (logits,), bwd)


def scaled_dot_product_attention(
    q: Tensor, k: Tensor, v: Tensor, mask: np.ndarray | None = None
) -> Tensor:
    """softmax(QK^T / sqrt(d_k) + mask_bias) V; mask True = attend.

    Works on any number of leading batch axes; the mask must broadcast to
    the score shape. A query row with every key blocked is rejected.
    """
    q, k, v = _as_tensor(q), _as_tensor(k), _as_tensor(v)
    if q.data.shape[-1] != k.data.shape[-1]:
        raise ShapeMismatch("q and k must share the head dimension")
    if k.data.shape[-2] != v.data.shape[-2]:
        raise ShapeMismatch("k and v must share the key-sequence length")
    d_k = q.data.shape[-1]
    scores = matmul(q, transpose(k, tuple(range(k.data.ndim - 2)) + (-1, -2)))
    scores = mul(scores, 1.0 / math.sqrt(d_k))
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        bcast = np.broadcast_to(mask, scores.data.shape)
        if (~bcast).all(axis=-1).any():
            raise FullyMaskedRow("a query row has all key positions blocked")
        scores = add(scores, Tensor(np.where(bcast, 0.0, MASK_BIAS)))
    weights = softmax(scores, axis=-1)
    return matmul(weights, v)


def backward(loss: Tensor) -> None:
    """Populate .grad for every grad-requiring tensor reachable from loss."""
    if loss.data.size != 1:
        raise NotScalar(f"backward needs a scalar, got shape {loss.data.shape}")
    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    running: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        g = running.get(id(node))
        if g is None:
            continue
        if node.requires_grad:
            if node.grad is None:
                node.grad = np.zeros_like(node.data)
            node.grad += g
        if node._backward is None:
            continue
        for p, gp in zip(node._parents, node._backward(g)):
            if gp is None or not p.requires_grad:
                continue
            prev = running.get(id(p))
            running[id(p)] = gp.copy() if prev is None else prev + gp
