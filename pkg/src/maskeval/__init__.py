"""Boundary-aware evaluation and curation for high-resolution masks.

The package scores predicted label maps against references with
region- and contour-sensitive metrics, summarizes mask complexity,
evaluates edge-emphasis training losses, and merges externally
produced pseudo masks into curated label maps. Hot kernels run as
compiled routines with a pure-array fallback; set MASKEVAL_BACKEND to
"numpy" or "numba" to pin one (see maskeval.backends).
"""

from .backends import BACKEND_NAME
from .core import (
    CANONICAL_CLASS_NAMES,
    DEFAULT_IGNORE_ID,
    BinaryMask,
    ClassTable,
    LabelMap,
    ProbMap,
    ProbStack,
    ValidationError,
    WeightMap,
    class_mask,
)
from .curation import (
    DatasetStats,
    MergePolicy,
    MergeReport,
    StatsAccumulator,
    dataset_stats,
    emit_training_weights,
    merge_pseudo,
)
from .io import (
    load_class_table,
    load_label_map,
    load_mask_png,
    load_prob_map,
    load_prob_stack,
    load_rgb_png,
    read_pfm,
    save_class_table,
    save_label_map,
    save_mask_png,
    save_rgb_png,
    write_pfm,
)
from .losses import (
    LossConfig,
    LossReport,
    dice_loss,
    edge_loss,
    new_class_bce,
    total_loss,
    weight_map,
    weighted_bce,
)
from .metrics import (
    ClassCounts,
    ClassScores,
    EvalRecord,
    IpqRecord,
    MetricAccumulator,
    MetricConfig,
    accumulate,
    bf1,
    biou,
    evaluate_pair,
    iou,
    ipq,
)
from .morphology import (
    band,
    box_filter,
    contour_perimeter,
    distance_transform,
    inner_boundary,
    semantic_edges,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "CANONICAL_CLASS_NAMES",
    "DEFAULT_IGNORE_ID",
    "BinaryMask",
    "ClassTable",
    "LabelMap",
    "ProbMap",
    "ProbStack",
    "ValidationError",
    "WeightMap",
    "class_mask",
    "DatasetStats",
    "MergePolicy",
    "MergeReport",
    "StatsAccumulator",
    "dataset_stats",
    "emit_training_weights",
    "merge_pseudo",
    "load_class_table",
    "load_label_map",
    "load_mask_png",
    "load_prob_map",
    "load_prob_stack",
    "load_rgb_png",
    "read_pfm",
    "save_class_table",
    "save_label_map",
    "save_mask_png",
    "save_rgb_png",
    "write_pfm",
    "LossConfig",
    "LossReport",
    "dice_loss",
    "edge_loss",
    "new_class_bce",
    "total_loss",
    "weight_map",
    "weighted_bce",
    "ClassCounts",
    "ClassScores",
    "EvalRecord",
    "IpqRecord",
    "MetricAccumulator",
    "MetricConfig",
    "accumulate",
    "bf1",
    "biou",
    "evaluate_pair",
    "iou",
    "ipq",
    "band",
    "box_filter",
    "contour_perimeter",
    "distance_transform",
    "inner_boundary",
    "semantic_edges",
    "__version__",
]
