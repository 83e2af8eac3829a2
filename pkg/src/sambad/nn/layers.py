"""Transformer building blocks on top of the autodiff engine.

Blocks follow the original post-norm layout: x = LN(x + sublayer(x)).
Parameters are float64, Xavier-uniform initialized from a caller-supplied
seeded numpy Generator so model construction is reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import OddDModel, ShapeMismatch
from . import autodiff as ad
from .autodiff import Tensor


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None) -> Tensor:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    shape = shape if shape is not None else (fan_in, fan_out)
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True)


def positional_encoding(max_len: int, d_model: int) -> np.ndarray:
    """Sinusoidal table: PE(pos, 2i) = sin(pos / 10000^(2i/d)), odd = cos."""
    if d_model % 2 != 0:
        raise OddDModel(f"d_model must be even, got {d_model}")
    pos = np.arange(max_len, dtype=np.float64)[:, None]
    i = np.arange(0, d_model, 2, dtype=np.float64)
    angle = pos / np.power(10000.0, i / d_model)
    pe = np.zeros((max_len, d_model))
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle)
    return pe


class Module:
    """Minimal parameter container with named-parameter traversal."""

    def parameters(self) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        for name, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                params[name] = value
            elif isinstance(value, Module):
                for sub, t in value.parameters().items():
                    params[f"{name}.{sub}"] = t
            elif isinstance(value, (list, tuple)):
                for idx, item in enumerate(value):
                    if isinstance(item, Module):
                        for sub, t in item.parameters().items():
                            params[f"{name}.{idx}.{sub}"] = t
        return params

    def load_parameters(self, weights: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        missing = set(params) ^ set(weights)
        if missing:
            raise ShapeMismatch(f"parameter names disagree: {sorted(missing)}")
        for name, t in params.items():
            w = np.asarray(weights[name], dtype=np.float64)
            if w.shape != t.data.shape:
                raise ShapeMismatch(f"{name}: {w.shape} vs {t.data.shape}")
            t.data = w.copy()

    def export_parameters(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.parameters().items()}


class Linear(Module):
    def __init__(self, rng, d_in: int, d_out: int):
        self.weight = xavier_uniform(rng, d_in, d_out)
        self.bias = Tensor(np.zeros(d_out), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ad.add(ad.matmul(x, self.weight), self.bias)


class Embedding(Module):
    def __init__(self, rng, vocab_size: int, d_model: int):
        self.weight = xavier_uniform(rng, vocab_size, d_model)

    def __call__(self, ids: np.ndarray) -> Tensor:
        return ad.embedding_lookup(self.weight, ids)


class LayerNorm(Module):
    def __init__(self, d: int, eps: float = 1e-5):
        self.gain = Tensor(np.ones(d), requires_grad=True)
        self.bias = Tensor(np.zeros(d), requires_grad=True)
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return ad.layer_norm(x, self.gain, self.bias, self.eps)


class MultiHeadAttention(Module):
    def __init__(self, rng, d_model: int, n_heads: int):
        if d_model % n_heads != 0:
            raise ShapeMismatch(f"n_heads={n_heads} must divide d_model={d_model}")
        self.n_heads = n_heads
        self.d_model = d_model
        self.d_k = d_model // n_heads
        self.wq = Linear(rng, d_model, d_model)
        self.wk = Linear(rng, d_model, d_model)
        self.wv = Linear(rng, d_model, d_model)
        self.wo = Linear(rng, d_model, d_model)

    def _split(self, x: Tensor, batch: int, length: int) -> Tensor:
        x = ad.reshape(x, (batch, length, self.n_heads, self.d_k))
        return ad.transpose(x, (0, 2, 1, 3))

    def __call__(self, xq: Tensor, xkv: Tensor, mask: np.ndarray | None = None) -> Tensor:
        """mask broadcasts to (batch, heads, L_q, L_k); True = attend."""
        b, l_q, _ = xq.data.shape
        l_k = xkv.data.shape[1]
        q = self._split(self.wq(xq), b, l_q)
        k = self._split(self.wk(xkv), b, l_k)
        v = self._split(self.wv(xkv), b, l_k)
        out = ad.scaled_dot_product_attention(q, k, v, mask)
        out = ad.reshape(ad.transpose(out, (0, 2, 1, 3)), (b, l_q, self.d_model))
        return self.wo(out)


class FeedForward(Module):
    def __init__(self, rng, d_model: int, d_ff: int):
        self.inner = Linear(rng, d_model, d_ff)
        self.outer = Linear(rng, d_ff, d_model)

    def __call__(self, x: Tensor) -> Tensor:
        return self.outer(ad.relu(self.inner(x)))


class EncoderBlock(Module):
    def __init__(self, rng, d_model: int, n_heads: int, d_ff: int, dropout_rate: float = 0.0):
        self.attn = MultiHeadAttention(rng, d_model, n_heads)
        self.norm1 = LayerNorm(d_model)
        self.ff = FeedForward(rng, d_model, d_ff)
        self.norm2 = LayerNorm(d_model)
        self.dropout_rate = dropout_rate

    def __call__(self, x: Tensor, pad_mask: np.ndarray | None = None, rng=None) -> Tensor:
        a = ad.dropout(self.attn(x, x, pad_mask), self.dropout_rate, rng)
        x = self.norm1(ad.add(x, a))
        f = ad.dropout(self.ff(x), self.dropout_rate, rng)
        return self.norm2(ad.add(x, f))


class DecoderBlock(Module):
    def __init__(self, rng, d_model: int, n_heads: int, d_ff: int, dropout_rate: float = 0.0):
        self.self_attn = MultiHeadAttention(rng, d_model, n_heads)
        self.norm1 = LayerNorm(d_model)
        self.cross_attn = MultiHeadAttention(rng, d_model, n_heads)
        self.norm2 = LayerNorm(d_model)
        self.ff = FeedForward(rng, d_model, d_ff)
        self.norm3 = LayerNorm(d_model)
        self.dropout_rate = dropout_rate

    def __call__(
        self,
        x: Tensor,
        memory: Tensor,
        causal_mask: np.ndarray,
        memory_mask: np.ndarray | None = None,
        rng=None,
    ) -> Tensor:
        a = ad.dropout(self.self_attn(x, x, causal_mask), self.dropout_rate, rng)
        x = self.norm1(ad.add(x, a))
        c = ad.dropout(self.cross_attn(x, memory, memory_mask), self.dropout_rate, rng)
        x = self.norm2(ad.add(x, c))
        f = ad.dropout(self.ff(x), self.dropout_rate, rng)
        return self.norm3(ad.add(x, f))


def causal_mask(length: int) -> np.ndarray:
    """(1, 1, L, L) lower-triangular boolean attend-mask."""
    return np.tril(np.ones((length, length), dtype=bool))[None, None]


def pad_attend_mask(ids: np.ndarray, pad_id: int) -> np.ndarray:
    """(batch, 1, 1, L) mask allowing attention to non-pad key positions."""
    return (np.asarray(ids) != pad_id)[:, None, None, :]
