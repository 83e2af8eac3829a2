from .autodiff import (
    Tensor,
    add,
    backward,
    cross_entropy,
    dropout,
    embedding_lookup,
    layer_norm,
    matmul,
    mean,
    mul,
    relu,
    reshape,
    scaled_dot_product_attention,
    softmax,
    sub,
    tensor_sum,
    transpose,
)
from .layers import (
    DecoderBlock,
    Embedding,
    EncoderBlock,
    FeedForward,
    LayerNorm,
    Linear,
    MultiHeadAttention,
    positional_encoding,
    xavier_uniform,
)
from .optim import AdamState, adam_step, clip_global_norm

__all__ = [
    "Tensor", "add", "sub", "mul", "matmul", "reshape", "transpose",
    "tensor_sum", "mean", "relu", "softmax", "layer_norm", "cross_entropy",
    "dropout", "embedding_lookup", "scaled_dot_product_attention", "backward",
    "Linear", "Embedding", "LayerNorm", "MultiHeadAttention", "FeedForward",
    "EncoderBlock", "DecoderBlock", "positional_encoding", "xavier_uniform",
    "AdamState", "adam_step", "clip_global_norm",
]
