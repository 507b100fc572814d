"""Unsupervised per-image segmentation with a dynamically weighted loss.

A small convolutional network is trained from scratch on each image,
balancing feature similarity against spatial continuity with a weight that
adapts to the number of clusters still present. The package also ships the
mIOU evaluation harness and a CLI (segment / evaluate / sweep).
"""

from .dataio import (
    DatasetManifest,
    ManifestEntry,
    load_image,
    load_label_map,
    load_manifest,
    palette_color,
    save_label_map,
)
from .errors import (
    ContractViolationError,
    DecodeError,
    DegenerateInputError,
    NumericDivergenceError,
)
from .kernels import BatchNormParams, ConvParams, SgdState
from .loss import (
    DEFAULT_MU,
    SCHEDULE_KINDS,
    LossBreakdown,
    WeightSchedule,
    continuity_loss,
    schedule_weight,
    similarity_loss,
    total_loss,
)
from .metrics import (
    VOID_LABEL,
    MetricsReport,
    VariantScores,
    bsd_variants,
    build_report,
    intersection_over_union,
    mean_iou,
    segment_count,
)
from .model import (
    ModelConfig,
    ModelParams,
    assign_labels,
    count_clusters,
    forward,
    init_model,
)
from .train import (
    IterationRecord,
    SegmentationResult,
    TrainConfig,
    should_stop,
    train_image,
    write_trace,
)

__version__ = "0.1.0"

__all__ = [
    "BatchNormParams",
    "ContractViolationError",
    "ConvParams",
    "DEFAULT_MU",
    "DatasetManifest",
    "DecodeError",
    "DegenerateInputError",
    "IterationRecord",
    "LossBreakdown",
    "ManifestEntry",
    "MetricsReport",
    "ModelConfig",
    "ModelParams",
    "NumericDivergenceError",
    "SCHEDULE_KINDS",
    "SegmentationResult",
    "SgdState",
    "TrainConfig",
    "VariantScores",
    "VOID_LABEL",
    "WeightSchedule",
    "assign_labels",
    "bsd_variants",
    "build_report",
    "continuity_loss",
    "count_clusters",
    "forward",
    "init_model",
    "intersection_over_union",
    "load_image",
    "load_label_map",
    "load_manifest",
    "mean_iou",
    "palette_color",
    "save_label_map",
    "schedule_weight",
    "segment_count",
    "should_stop",
    "similarity_loss",
    "total_loss",
    "train_image",
    "write_trace",
]
