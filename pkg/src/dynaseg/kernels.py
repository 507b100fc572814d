"""Numeric kernels for the segmentation network.

Every layer gets an explicit forward pass and a hand-derived backward pass.
All arithmetic is double precision and bit-deterministic: reductions run in
a fixed order, so identical inputs always produce identical outputs.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ContractViolationError, DegenerateInputError


def check_finite(arr: np.ndarray, name: str = "tensor") -> np.ndarray:
    """Reject NaN/Inf values coming from external input."""
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} contains non-finite values")
    return arr


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ContractViolationError(message)


@dataclass
class ConvParams:
    """Weights (C_out, C_in, k, k) and bias (C_out,) of a square convolution.

    The network uses k=3 for feature extraction and k=1 for the per-pixel
    classifier; both run at stride 1 with zero padding k//2, so the spatial
    size never changes.
    """

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        _require(self.weights.ndim == 4, "conv weights must be 4-D (C_out, C_in, k, k)")
        k = self.weights.shape[2]
        _require(self.weights.shape[3] == k, "conv kernel must be square")
        _require(k in (1, 3), f"conv kernel size must be 1 or 3, got {k}")
        _require(self.bias.shape == (self.weights.shape[0],),
                 "conv bias length must equal the output channel count")

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weights.shape[2]


@dataclass
class BatchNormParams:
    """Per-channel scale/shift with a variance floor eps > 0."""

    gamma: np.ndarray
    beta: np.ndarray
    eps: float = 1e-5

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=np.float64)
        self.beta = np.asarray(self.beta, dtype=np.float64)
        _require(self.gamma.ndim == 1 and self.gamma.shape == self.beta.shape,
                 "gamma and beta must be matching 1-D vectors")
        _require(self.eps > 0, "batchnorm eps must be positive")


@dataclass
class BatchNormCache:
    """Intermediates saved by batchnorm_forward for the backward pass."""

    normalized: np.ndarray  # xhat, shape (C, H, W)
    inv_std: np.ndarray     # 1/sqrt(var + eps), shape (C, 1, 1)


@dataclass
class SgdState:
    """Classical momentum SGD: v <- momentum*v + g, p <- p - lr*v."""

    learning_rate: float
    momentum: float = 0.0
    velocities: list = field(default_factory=list)

    def __post_init__(self):
        _require(self.learning_rate > 0, "learning rate must be positive")
        _require(0.0 <= self.momentum < 1.0, "momentum must lie in [0, 1)")

    @classmethod
    def for_params(cls, params, learning_rate, momentum=0.0):
        state = cls(learning_rate=learning_rate, momentum=momentum)
        state.velocities = [np.zeros_like(p) for p in params]
        return state


def _im2col(padded: np.ndarray, k: int, height: int, width: int) -> np.ndarray:
    # (C, H+2p, W+2p) -> (C*k*k, H*W) with (channel, dy, dx) fastest-last order
    windows = sliding_window_view(padded, (k, k), axis=(1, 2))
    cols = windows.transpose(0, 3, 4, 1, 2).reshape(-1, height * width)
    return np.ascontiguousarray(cols)


def conv2d_forward(inp: np.ndarray, params: ConvParams) -> np.ndarray:
    """Stride-1, zero-padded convolution; output spatial size equals input's.

    out[o, y, x] = bias[o] + sum_{c,dy,dx} w[o,c,dy,dx] * padded[c, y+dy, x+dx]
    """
    _require(inp.ndim == 3, "conv input must be (C, H, W)")
    c_in, height, width = inp.shape
    _require(c_in == params.in_channels,
             f"conv expects {params.in_channels} input channels, got {c_in}")
    _require(height >= 1 and width >= 1, "conv input must have H, W >= 1")

    k = params.kernel_size
    pad = k // 2
    padded = np.pad(inp, ((0, 0), (pad, pad), (pad, pad))) if pad else inp
    cols = _im2col(padded, k, height, width)
    flat_w = params.weights.reshape(params.out_channels, -1)
    out = flat_w @ cols + params.bias[:, None]
    return out.reshape(params.out_channels, height, width)


def conv2d_backward(inp: np.ndarray, params: ConvParams, grad_out: np.ndarray):
    """Exact gradients of conv2d_forward w.r.t. input, weights, and bias.

    Returns (grad_input, grad_params) where grad_params is ConvParams-shaped.
    """
    c_in, height, width = inp.shape
    _require(grad_out.shape == (params.out_channels, height, width),
             f"grad_out shape {grad_out.shape} does not match conv output "
             f"{(params.out_channels, height, width)}")

    k = params.kernel_size
    pad = k // 2
    padded = np.pad(inp, ((0, 0), (pad, pad), (pad, pad))) if pad else inp
    cols = _im2col(padded, k, height, width)
    flat_w = params.weights.reshape(params.out_channels, -1)
    flat_g = grad_out.reshape(params.out_channels, -1)

    grad_bias = flat_g.sum(axis=1)
    grad_weights = (flat_g @ cols.T).reshape(params.weights.shape)

    grad_cols = (flat_w.T @ flat_g).reshape(c_in, k, k, height, width)
    grad_padded = np.zeros_like(padded)
    for dy in range(k):
        for dx in range(k):
            grad_padded[:, dy:dy + height, dx:dx + width] += grad_cols[:, dy, dx]
    grad_input = grad_padded[:, pad:pad + height, pad:pad + width] if pad else grad_padded

    return grad_input, ConvParams(weights=grad_weights, bias=grad_bias)


def relu(inp: np.ndarray) -> np.ndarray:
    return np.maximum(inp, 0.0)


def relu_backward(inp: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """Subgradient at 0 is defined as 0: gradient passes only where inp > 0."""
    _require(grad_out.shape == inp.shape, "relu grad_out shape must match input")
    return np.where(inp > 0, grad_out, 0.0)


def batchnorm_forward(inp: np.ndarray, params: BatchNormParams):
    """Normalize each channel over its H*W positions, then scale and shift.

    Uses biased (population) variance; the single image's pixels are the batch.
    Returns (output, cache) with the cache feeding batchnorm_backward.
    """
    _require(inp.ndim == 3, "batchnorm input must be (C, H, W)")
    channels, height, width = inp.shape
    _require(channels == params.gamma.shape[0],
             f"batchnorm expects {params.gamma.shape[0]} channels, got {channels}")
    if height * width < 2:
        raise DegenerateInputError("batchnorm needs at least two spatial positions")

    mean = inp.mean(axis=(1, 2), keepdims=True)
    var = inp.var(axis=(1, 2), keepdims=True)
    inv_std = 1.0 / np.sqrt(var + params.eps)
    normalized = (inp - mean) * inv_std
    out = params.gamma[:, None, None] * normalized + params.beta[:, None, None]
    return out, BatchNormCache(normalized=normalized, inv_std=inv_std)


def batchnorm_backward(cache: BatchNormCache, params: BatchNormParams, grad_out: np.ndarray):
    """Gradients of batchnorm_forward, including the mean/variance terms.

    Returns (grad_input, grad_gamma, grad_beta).
    """
    _require(grad_out.shape == cache.normalized.shape,
             f"grad_out shape {grad_out.shape} does not match cached forward "
             f"shape {cache.normalized.shape}")
    xhat = cache.normalized
    grad_beta = grad_out.sum(axis=(1, 2))
    grad_gamma = (grad_out * xhat).sum(axis=(1, 2))

    gx = grad_out * params.gamma[:, None, None]
    grad_input = cache.inv_std * (
        gx
        - gx.mean(axis=(1, 2), keepdims=True)
        - xhat * (gx * xhat).mean(axis=(1, 2), keepdims=True)
    )
    return grad_input, grad_gamma, grad_beta


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean per-pixel cross entropy of channel-softmax against integer labels.

    Returns (loss, grad_logits); grad is (softmax - onehot) / (H*W), so it
    sums to zero over the channel axis at every pixel.
    """
    _require(logits.ndim == 3, "logits must be (q, H, W)")
    q, height, width = logits.shape
    labels = np.asarray(labels)
    _require(labels.shape == (height, width),
             f"label map shape {labels.shape} does not match logits {(height, width)}")
    _require(np.issubdtype(labels.dtype, np.integer), "labels must be integers")
    if labels.size and (labels.min() < 0 or labels.max() >= q):
        raise ContractViolationError(
            f"labels must lie in [0, {q}), found range "
            f"[{labels.min()}, {labels.max()}]")

    shifted = logits - logits.max(axis=0, keepdims=True)
    exp = np.exp(shifted)
    total = exp.sum(axis=0, keepdims=True)
    log_probs = shifted - np.log(total)

    n_pixels = height * width
    picked = np.take_along_axis(log_probs, labels[None, :, :], axis=0)
    loss = -picked.sum() / n_pixels

    grad = exp / total
    ys, xs = np.indices((height, width))
    grad[labels, ys, xs] -= 1.0
    grad /= n_pixels
    return loss, grad


def sgd_step(params, grads, state: SgdState) -> None:
    """Update parameter arrays in place with classical momentum."""
    _require(len(params) == len(grads) == len(state.velocities),
             "params, grads, and velocities must have matching lengths")
    for p, g, v in zip(params, grads, state.velocities):
        _require(p.shape == g.shape == v.shape,
                 f"parameter/gradient/velocity shapes differ: "
                 f"{p.shape}, {g.shape}, {v.shape}")
        v *= state.momentum
        v += g
        p -= state.learning_rate * v
