"""The per-image segmentation network.

A stack of M feature blocks (3x3 conv -> ReLU -> batchnorm), a 1x1 per-pixel
classifier mapping features to cluster channels, and a final batchnorm that
yields the normalized response map. Argmax over channels turns the response
into a label map.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError
from .kernels import (
    BatchNormParams,
    ConvParams,
    batchnorm_backward,
    batchnorm_forward,
    conv2d_backward,
    conv2d_forward,
    relu,
    relu_backward,
)


@dataclass
class ModelConfig:
    """Architecture settings; defaults follow the reference setup (M=3, p=q=100)."""

    m_components: int = 3
    feature_dim: int = 100
    cluster_dim: int = 100
    input_channels: int = 3

    def __post_init__(self):
        if self.m_components < 1:
            raise ContractViolationError("m_components must be >= 1")
        if self.feature_dim < 2 or self.cluster_dim < 2:
            raise ContractViolationError("feature_dim and cluster_dim must be >= 2")
        if self.input_channels < 1:
            raise ContractViolationError("input_channels must be >= 1")


@dataclass
class FeatureBlock:
    conv: ConvParams
    norm: BatchNormParams


@dataclass
class ModelParams:
    """All trainable arrays of the network (also reused as a gradient container)."""

    blocks: list  # FeatureBlock per component
    classifier: ConvParams
    response_norm: BatchNormParams

    def tensors(self) -> list:
        """Trainable arrays in a fixed order (pairs up with SGD velocities)."""
        arrays = []
        for block in self.blocks:
            arrays += [block.conv.weights, block.conv.bias,
                       block.norm.gamma, block.norm.beta]
        arrays += [self.classifier.weights, self.classifier.bias,
                   self.response_norm.gamma, self.response_norm.beta]
        return arrays


@dataclass
class ForwardCache:
    """Per-layer intermediates retained for the backward pass."""

    conv_inputs: list       # input tensor of each feature-block conv
    pre_activations: list   # conv outputs before ReLU
    norm_caches: list       # batchnorm cache of each feature block
    classifier_input: np.ndarray
    response_cache: object  # batchnorm cache of the final normalization


def init_model(config: ModelConfig, seed: int) -> ModelParams:
    """Seeded uniform fan-in init: weights ~ U[-k, k] with k = 1/sqrt(fan_in).

    Biases start at 0, batchnorm scales at 1 and shifts at 0. The same seed
    reproduces bit-identical parameters.
    """
    rng = np.random.default_rng(seed)
    blocks = []
    in_channels = config.input_channels
    for _ in range(config.m_components):
        fan_in = in_channels * 3 * 3
        bound = 1.0 / np.sqrt(fan_in)
        weights = rng.uniform(-bound, bound, size=(config.feature_dim, in_channels, 3, 3))
        blocks.append(FeatureBlock(
            conv=ConvParams(weights=weights, bias=np.zeros(config.feature_dim)),
            norm=BatchNormParams(gamma=np.ones(config.feature_dim),
                                 beta=np.zeros(config.feature_dim)),
        ))
        in_channels = config.feature_dim

    bound = 1.0 / np.sqrt(config.feature_dim)
    classifier = ConvParams(
        weights=rng.uniform(-bound, bound,
                            size=(config.cluster_dim, config.feature_dim, 1, 1)),
        bias=np.zeros(config.cluster_dim),
    )
    response_norm = BatchNormParams(gamma=np.ones(config.cluster_dim),
                                    beta=np.zeros(config.cluster_dim))
    return ModelParams(blocks=blocks, classifier=classifier, response_norm=response_norm)


def forward(params: ModelParams, image: np.ndarray):
    """Run the network on a (C, H, W) image; returns (response, cache).

    The response has shape (cluster_dim, H, W) and the same spatial size as
    the input for any H, W >= 2.
    """
    expected = params.blocks[0].conv.in_channels
    if image.ndim != 3 or image.shape[0] != expected:
        raise ContractViolationError(
            f"image must be ({expected}, H, W), got {image.shape}")

    conv_inputs, pre_activations, norm_caches = [], [], []
    x = image
    for block in params.blocks:
        conv_inputs.append(x)
        a = conv2d_forward(x, block.conv)
        pre_activations.append(a)
        x, cache = batchnorm_forward(relu(a), block.norm)
        norm_caches.append(cache)

    classifier_input = x
    logits = conv2d_forward(x, params.classifier)
    response, response_cache = batchnorm_forward(logits, params.response_norm)
    return response, ForwardCache(
        conv_inputs=conv_inputs,
        pre_activations=pre_activations,
        norm_caches=norm_caches,
        classifier_input=classifier_input,
        response_cache=response_cache,
    )


def backward(cache: ForwardCache, params: ModelParams, grad_response: np.ndarray) -> ModelParams:
    """Chain all layer backward passes; returns a ModelParams-shaped gradient."""
    if grad_response.shape != cache.response_cache.normalized.shape:
        raise ContractViolationError(
            f"grad_response shape {grad_response.shape} does not match the "
            f"cached forward shape {cache.response_cache.normalized.shape}")

    g, g_gamma, g_beta = batchnorm_backward(cache.response_cache,
                                            params.response_norm, grad_response)
    response_norm_grad = BatchNormParams(gamma=g_gamma, beta=g_beta)
    g, classifier_grad = conv2d_backward(cache.classifier_input, params.classifier, g)

    block_grads = [None] * len(params.blocks)
    for i in reversed(range(len(params.blocks))):
        block = params.blocks[i]
        g, g_gamma, g_beta = batchnorm_backward(cache.norm_caches[i], block.norm, g)
        g = relu_backward(cache.pre_activations[i], g)
        g, conv_grad = conv2d_backward(cache.conv_inputs[i], block.conv, g)
        block_grads[i] = FeatureBlock(
            conv=conv_grad,
            norm=BatchNormParams(gamma=g_gamma, beta=g_beta),
        )

    return ModelParams(blocks=block_grads, classifier=classifier_grad,
                       response_norm=response_norm_grad)


def assign_labels(response: np.ndarray) -> np.ndarray:
    """Per-pixel argmax over channels; ties go to the lowest channel index."""
    if response.ndim != 3:
        raise ContractViolationError("response map must be (q, H, W)")
    return np.argmax(response, axis=0)


def count_clusters(labels: np.ndarray) -> int:
    """Number of distinct label values present in the map."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ContractViolationError("label map must be non-empty")
    return int(np.unique(labels).size)
