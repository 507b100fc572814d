"""Per-image training loop.

Each image gets a freshly initialized network. One iteration runs forward,
argmax label assignment, cluster counting, the dynamically weighted loss,
backward, and an SGD step. Training stops once the cluster count falls to
min_labels or the iteration budget runs out.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DegenerateInputError, NumericDivergenceError
from .kernels import SgdState, check_finite, sgd_step
from .loss import WeightSchedule, total_loss
from .model import (
    ModelConfig,
    assign_labels,
    backward,
    count_clusters,
    forward,
    init_model,
)

STOP_MIN_LABELS = "min_labels"
STOP_MAX_ITERS = "max_iters"


@dataclass
class TrainConfig:
    """Loop settings; the numeric defaults mirror the reference framework."""

    schedule: WeightSchedule
    max_iters: int = 1000
    learning_rate: float = 0.1
    momentum: float = 0.9
    min_labels: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ContractViolationError("max_iters must be >= 1")
        if self.min_labels < 1:
            raise ContractViolationError("min_labels must be >= 1")


@dataclass
class IterationRecord:
    """One history row: losses, effective weight, and cluster count."""

    iteration: int
    total: float
    similarity: float
    continuity: float
    effective_weight: float
    num_clusters: int


@dataclass
class SegmentationResult:
    labels: np.ndarray
    history: list
    iterations_run: int
    stop_reason: str


def should_stop(num_clusters: int, iteration: int, cfg: TrainConfig):
    """Return a stop reason, or None to continue.

    Stops when the cluster count has collapsed to min_labels or fewer, or
    when the iteration budget is exhausted; the cluster criterion wins when
    both hold.
    """
    if num_clusters <= cfg.min_labels:
        return STOP_MIN_LABELS
    if iteration >= cfg.max_iters:
        return STOP_MAX_ITERS
    return None


def train_image(image: np.ndarray, model_cfg: ModelConfig,
                train_cfg: TrainConfig) -> SegmentationResult:
    """Train a fresh network on one image and return its final segmentation.

    The returned labels come from the final iteration's forward pass; the
    history holds one record per iteration run. Raises
    NumericDivergenceError if any loss value turns non-finite.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3:
        raise ContractViolationError(f"image must be (C, H, W), got shape {image.shape}")
    if image.shape[1] * image.shape[2] < 2:
        raise DegenerateInputError("image needs at least two pixels")
    check_finite(image, "image")

    params = init_model(model_cfg, train_cfg.seed)
    tensors = params.tensors()
    state = SgdState.for_params(tensors, train_cfg.learning_rate, train_cfg.momentum)

    history = []
    labels = None
    reason = None
    for iteration in range(1, train_cfg.max_iters + 1):
        response, cache = forward(params, image)
        labels = assign_labels(response)
        num_clusters = count_clusters(labels)
        breakdown, grad_response = total_loss(
            response, labels, train_cfg.schedule, num_clusters)

        values = (breakdown.total, breakdown.similarity,
                  breakdown.continuity, breakdown.effective_weight)
        if not all(math.isfinite(v) for v in values):
            raise NumericDivergenceError(iteration)

        history.append(IterationRecord(
            iteration=iteration,
            total=breakdown.total,
            similarity=breakdown.similarity,
            continuity=breakdown.continuity,
            effective_weight=breakdown.effective_weight,
            num_clusters=num_clusters,
        ))

        reason = should_stop(num_clusters, iteration, train_cfg)
        if reason is not None:
            break

        grads = backward(cache, params, grad_response)
        sgd_step(tensors, grads.tensors(), state)

    return SegmentationResult(labels=labels, history=history,
                              iterations_run=len(history), stop_reason=reason)


TRACE_COLUMNS = ("iter", "L", "L_sim", "L_con", "mu_eff", "q_prime")


def write_trace(history, path) -> None:
    """Write per-iteration records as tab-separated lines with a header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(TRACE_COLUMNS) + "\n")
        for rec in history:
            fh.write(f"{rec.iteration}\t{rec.total!r}\t{rec.similarity!r}"
                     f"\t{rec.continuity!r}\t{rec.effective_weight!r}"
                     f"\t{rec.num_clusters}\n")
