"""Segmentation quality metrics.

mean_iou uses best-match scoring: every ground-truth segment is scored by
the highest IoU any predicted cluster achieves against it (a predicted
cluster may serve several segments), and the scores are averaged without
size weighting. For datasets carrying several annotations per image, the
all/fine/coarse variants aggregate over every annotation, the one with the
most segments, and the one with the fewest.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError

# Ground-truth pixels with this value are unlabeled and excluded from both
# intersection and union (VOC-style boundary void).
VOID_LABEL = 255


def intersection_over_union(pred_mask: np.ndarray, gt_mask: np.ndarray) -> float:
    """IoU of two boolean masks; 0 when the prediction is empty."""
    pred_mask = np.asarray(pred_mask, dtype=bool)
    gt_mask = np.asarray(gt_mask, dtype=bool)
    if pred_mask.shape != gt_mask.shape:
        raise ContractViolationError(
            f"mask shapes differ: {pred_mask.shape} vs {gt_mask.shape}")
    gt_count = int(gt_mask.sum())
    if gt_count == 0:
        raise ContractViolationError("ground-truth mask must be non-empty")
    inter = int(np.logical_and(pred_mask, gt_mask).sum())
    union = int(np.logical_or(pred_mask, gt_mask).sum())
    return inter / union


def _valid_region(gt: np.ndarray) -> np.ndarray:
    valid = gt != VOID_LABEL
    if not valid.any():
        raise ContractViolationError("ground truth has no non-void pixels")
    return valid


def mean_iou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Best-match mIOU of a predicted label map against one annotation.

    Pixels where the annotation carries VOID_LABEL are ignored entirely.
    Invariant under relabeling of either map; mean_iou(x, x) == 1.
    """
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.ndim != 2 or pred.shape != gt.shape:
        raise ContractViolationError(
            f"label map shapes differ: {pred.shape} vs {gt.shape}")

    valid = _valid_region(gt)
    gt_vals, gt_idx = np.unique(gt[valid], return_inverse=True)
    pred_vals, pred_idx = np.unique(pred[valid], return_inverse=True)

    counts = np.bincount(
        gt_idx * pred_vals.size + pred_idx,
        minlength=gt_vals.size * pred_vals.size,
    ).reshape(gt_vals.size, pred_vals.size)

    gt_sizes = counts.sum(axis=1, keepdims=True)
    pred_sizes = counts.sum(axis=0, keepdims=True)
    union = gt_sizes + pred_sizes - counts
    best = (counts / union).max(axis=1)
    return float(best.mean())


def segment_count(gt: np.ndarray) -> int:
    """Number of distinct non-void segments in an annotation."""
    gt = np.asarray(gt)
    valid = _valid_region(gt)
    return int(np.unique(gt[valid]).size)


@dataclass
class VariantScores:
    """Per-image mIOU under the three annotation-selection variants."""

    all: float
    fine: float
    coarse: float


def bsd_variants(pred: np.ndarray, annotations) -> VariantScores:
    """Score one prediction against a set of annotations.

    all: mean mIOU over every annotation; fine: against the annotation with
    the most segments; coarse: against the one with the fewest. Ties on the
    segment count go to the earlier annotation.
    """
    if not annotations:
        raise ContractViolationError("annotation set must be non-empty")
    scores = [mean_iou(pred, gt) for gt in annotations]
    seg_counts = np.array([segment_count(gt) for gt in annotations])
    fine_idx = int(np.argmax(seg_counts))
    coarse_idx = int(np.argmin(seg_counts))
    return VariantScores(
        all=float(np.mean(scores)),
        fine=scores[fine_idx],
        coarse=scores[coarse_idx],
    )


@dataclass
class MetricsReport:
    """Dataset-level aggregation: mean = (all + fine + coarse) / 3."""

    per_image: list  # (name, VariantScores) pairs in input order
    all: float
    fine: float
    coarse: float
    mean: float


def build_report(named_scores) -> MetricsReport:
    """Aggregate (name, VariantScores) pairs into a MetricsReport."""
    named_scores = list(named_scores)
    if not named_scores:
        raise ContractViolationError("report needs at least one scored image")
    all_agg = float(np.mean([s.all for _, s in named_scores]))
    fine_agg = float(np.mean([s.fine for _, s in named_scores]))
    coarse_agg = float(np.mean([s.coarse for _, s in named_scores]))
    return MetricsReport(
        per_image=named_scores,
        all=all_agg,
        fine=fine_agg,
        coarse=coarse_agg,
        mean=(all_agg + fine_agg + coarse_agg) / 3.0,
    )
