"""Region and boundary quality metrics for semantic masks.

Three pairwise scores share one counting pass:

* IoU — intersection over union of the raw class masks.
* BIoU — IoU restricted to a band of width ``d`` inside each mask,
  measured from the mask border (the outside of the frame counts as
  complement, so masks touching the frame edge still get a band there).
  ``d`` adapts to image size: ``max(min_d, round(fraction * diagonal))``
  with round-half-away-from-zero.
* BF1 — boundary F1. One-pixel inner contours are matched within a
  Euclidean tolerance; precision counts matched predicted contour
  pixels, recall counts matched reference contour pixels.

Empty-set conventions, applied after ignore filtering:

* IoU / BIoU with an empty union score 1.0 (vacuously perfect).
* BF1 with both contour sets empty scores (1.0, 1.0, 1.0); with exactly
  one empty, (0.0, 0.0, 0.0).

Pixels that are ignored in either map of a pair take no part in any
count, numerator or denominator.

Mask complexity is summarized by the mean isoperimetric quotient: for
each class present in a map, ``L²/A`` of its mask (chain-code perimeter
squared over pixel area), averaged over the ``n`` present classes and
normalized by ``4*pi``. A disk scores near 1, ragged masks score higher.

Dataset-level aggregation keeps integer counts per class and divides
once at the end (ratio of sums, not mean of ratios), so accumulators
can be merged across workers without changing the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .core import (
    BinaryMask,
    ClassTable,
    LabelMap,
    class_mask,
    require,
    require_same_shape,
)
from .morphology import band, contour_perimeter, inner_boundary, sqdist_to_complement, sqdist_within

__all__ = [
    "MetricConfig",
    "ClassCounts",
    "ClassScores",
    "EvalRecord",
    "IpqRecord",
    "MetricAccumulator",
    "iou",
    "biou",
    "bf1",
    "ipq",
    "evaluate_pair",
    "accumulate",
]


@dataclass(frozen=True)
class MetricConfig:
    """Evaluation parameters; frozen so jobs can share one instance.

    biou_fraction and biou_min_d control the adaptive band width,
    bf1_tolerance the contour matching radius in pixels.
    per_image_mean switches dataset aggregation from ratio-of-sums to a
    mean of per-image scores; the artifact records which one was used.
    """

    biou_fraction: float = 0.001
    biou_min_d: int = 1
    bf1_tolerance: float = 2.0
    classes: ClassTable = field(default_factory=ClassTable.canonical)
    per_image_mean: bool = False

    def __post_init__(self) -> None:
        require(self.biou_fraction > 0.0, "biou_fraction must be positive")
        require(self.biou_min_d >= 1, "biou_min_d must be at least 1")
        require(self.bf1_tolerance >= 0.0, "bf1_tolerance must be non-negative")
        require(isinstance(self.classes, ClassTable), "classes must be a ClassTable")

    def effective_d(self, width: int, height: int) -> int:
        """Band width for an image: max(min_d, round(fraction * diagonal))."""
        require(width >= 1 and height >= 1, "image dimensions must be positive")
        scaled = self.biou_fraction * math.hypot(float(width), float(height))
        # round half away from zero; scaled is never negative here
        return max(self.biou_min_d, int(math.floor(scaled + 0.5)))

    def to_json_dict(self) -> dict:
        return {
            "biou_fraction": self.biou_fraction,
            "biou_min_d": self.biou_min_d,
            "bf1_tolerance": self.bf1_tolerance,
            "classes": self.classes.to_json_dict(),
            "per_image_mean": self.per_image_mean,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "MetricConfig":
        return cls(
            biou_fraction=float(obj["biou_fraction"]),
            biou_min_d=int(obj["biou_min_d"]),
            bf1_tolerance=float(obj["bf1_tolerance"]),
            classes=ClassTable.from_json_dict(obj["classes"]),
            per_image_mean=bool(obj.get("per_image_mean", False)),
        )


@dataclass
class ClassCounts:
    """Raw integer tallies for one class; addition merges two tallies."""

    iou_intersection: int = 0
    iou_union: int = 0
    biou_intersection: int = 0
    biou_union: int = 0
    bf1_pred_matched: int = 0
    bf1_pred_total: int = 0
    bf1_gt_matched: int = 0
    bf1_gt_total: int = 0

    def __add__(self, other: "ClassCounts") -> "ClassCounts":
        return ClassCounts(
            self.iou_intersection + other.iou_intersection,
            self.iou_union + other.iou_union,
            self.biou_intersection + other.biou_intersection,
            self.biou_union + other.biou_union,
            self.bf1_pred_matched + other.bf1_pred_matched,
            self.bf1_pred_total + other.bf1_pred_total,
            self.bf1_gt_matched + other.bf1_gt_matched,
            self.bf1_gt_total + other.bf1_gt_total,
        )

    def is_zero(self) -> bool:
        return self.iou_union == 0

    def to_json_dict(self) -> dict:
        return {
            "iou_intersection": self.iou_intersection,
            "iou_union": self.iou_union,
            "biou_intersection": self.biou_intersection,
            "biou_union": self.biou_union,
            "bf1_pred_matched": self.bf1_pred_matched,
            "bf1_pred_total": self.bf1_pred_total,
            "bf1_gt_matched": self.bf1_gt_matched,
            "bf1_gt_total": self.bf1_gt_total,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "ClassCounts":
        return cls(**{k: int(obj[k]) for k in (
            "iou_intersection", "iou_union",
            "biou_intersection", "biou_union",
            "bf1_pred_matched", "bf1_pred_total",
            "bf1_gt_matched", "bf1_gt_total",
        )})


@dataclass(frozen=True)
class ClassScores:
    """Finalized per-class scores; None marks undefined (nothing to score)."""

    iou: float
    biou: float | None
    bf1_precision: float | None
    bf1_recall: float | None
    bf1: float | None

    def to_json_dict(self) -> dict:
        return {
            "iou": self.iou,
            "biou": self.biou,
            "bf1_precision": self.bf1_precision,
            "bf1_recall": self.bf1_recall,
            "bf1": self.bf1,
        }


@dataclass(frozen=True)
class EvalRecord:
    """Scores for one prediction/reference pair."""

    image_id: str
    effective_d: int
    per_class: dict[int, ClassScores]

    def to_json_dict(self) -> dict:
        return {
            "image": self.image_id,
            "effective_d": self.effective_d,
            "classes": {str(cid): s.to_json_dict() for cid, s in sorted(self.per_class.items())},
        }


@dataclass(frozen=True)
class IpqRecord:
    """Per-class perimeters and areas plus their isoperimetric summary."""

    perimeters: dict[int, float]
    areas: dict[int, int]
    n: int
    mipq: float

    def recompute(self) -> float:
        total = sum(self.perimeters[cid] ** 2 / self.areas[cid] for cid in self.perimeters)
        return total / (4.0 * math.pi * self.n)

    def to_json_dict(self) -> dict:
        return {
            "perimeters": {str(c): p for c, p in sorted(self.perimeters.items())},
            "areas": {str(c): a for c, a in sorted(self.areas.items())},
            "n": self.n,
            "mipq": self.mipq,
        }


def _valid_mask(ignore: BinaryMask | None, shape: tuple[int, int]) -> BinaryMask | None:
    if ignore is None:
        return None
    require(ignore.shape == shape, "ignore mask shape differs from the masks")
    if not ignore.any():
        return None
    return ~ignore


def _cnz(arr: np.ndarray) -> int:
    return int(np.count_nonzero(arr))


def _ratio(num: int, den: int, empty_value: float = 1.0) -> float:
    return num / den if den > 0 else empty_value


def _band_and_contour(mask: BinaryMask, d: int) -> tuple[BinaryMask, BinaryMask]:
    """Inner band of width d and the one-pixel inner contour, one pass.

    Both come from the squared distance to the mask complement (frame
    exterior included): the contour is dsq == 1, the band dsq <= d².
    """
    if not mask.any():
        empty = np.zeros(mask.shape, dtype=bool)
        return empty, empty
    dsq = sqdist_to_complement(mask, float(max(1, d)))
    contour = dsq == 1
    if d < 1:
        return np.zeros(mask.shape, dtype=bool), contour
    return mask & (dsq <= d * d), contour


def _match_counts(
    pred_contour: BinaryMask, gt_contour: BinaryMask, tolerance: float
) -> tuple[int, int, int, int]:
    """(pred matched, pred total, gt matched, gt total) within tolerance."""
    pred_total = _cnz(pred_contour)
    gt_total = _cnz(gt_contour)
    if pred_total == 0 or gt_total == 0:
        return 0, pred_total, 0, gt_total
    t2 = tolerance * tolerance
    pred_matched = _cnz(pred_contour & (sqdist_within(gt_contour, tolerance) <= t2))
    gt_matched = _cnz(gt_contour & (sqdist_within(pred_contour, tolerance) <= t2))
    return pred_matched, pred_total, gt_matched, gt_total


def _pair_class_counts(
    pred: BinaryMask,
    gt: BinaryMask,
    valid: BinaryMask | None,
    d: int,
    tolerance: float,
) -> ClassCounts:
    """All eight tallies for one class of one image pair.

    Bands and contours are taken from the raw masks; the valid mask only
    filters what gets counted, so ignore regions neither score nor shift
    the geometry around them.
    """

    def county(arr: np.ndarray) -> int:
        return _cnz(arr if valid is None else arr & valid)

    inter = county(pred & gt)
    union = county(pred | gt)
    if union == 0:
        return ClassCounts()

    band_p, contour_p = _band_and_contour(pred, d)
    band_g, contour_g = _band_and_contour(gt, d)
    b_inter = county(band_p & band_g)
    b_union = county(band_p | band_g)

    if valid is not None:
        contour_p = contour_p & valid
        contour_g = contour_g & valid
    pm, pt, gm, gtot = _match_counts(contour_p, contour_g, tolerance)

    return ClassCounts(inter, union, b_inter, b_union, pm, pt, gm, gtot)


def iou(pred: BinaryMask, gt: BinaryMask, ignore: BinaryMask | None = None) -> float:
    """Intersection over union; 1.0 when the union is empty."""
    require_same_shape(pred, gt)
    valid = _valid_mask(ignore, pred.shape)
    if valid is None:
        return _ratio(_cnz(pred & gt), _cnz(pred | gt))
    return _ratio(_cnz(pred & gt & valid), _cnz((pred | gt) & valid))


def biou(pred: BinaryMask, gt: BinaryMask, d: int, ignore: BinaryMask | None = None) -> float:
    """IoU of the width-d inner bands; 1.0 when both bands are empty."""
    require_same_shape(pred, gt)
    require(d >= 1, "band width must be at least 1")
    valid = _valid_mask(ignore, pred.shape)
    band_p = band(pred, float(d))
    band_g = band(gt, float(d))
    if valid is None:
        return _ratio(_cnz(band_p & band_g), _cnz(band_p | band_g))
    return _ratio(_cnz(band_p & band_g & valid), _cnz((band_p | band_g) & valid))


def bf1(
    pred: BinaryMask,
    gt: BinaryMask,
    tolerance: float = 2.0,
    ignore: BinaryMask | None = None,
) -> tuple[float, float, float]:
    """Boundary precision, recall, F1 with the given matching tolerance."""
    require_same_shape(pred, gt)
    require(tolerance >= 0.0, "tolerance must be non-negative")
    valid = _valid_mask(ignore, pred.shape)
    contour_p = inner_boundary(pred)
    contour_g = inner_boundary(gt)
    if valid is not None:
        contour_p = contour_p & valid
        contour_g = contour_g & valid
    pm, pt, gm, gtot = _match_counts(contour_p, contour_g, tolerance)
    return _bf1_from_counts(pm, pt, gm, gtot)


def _bf1_from_counts(pm: int, pt: int, gm: int, gtot: int) -> tuple[float, float, float]:
    if pt == 0 and gtot == 0:
        return 1.0, 1.0, 1.0
    if pt == 0 or gtot == 0:
        return 0.0, 0.0, 0.0
    precision = pm / pt
    recall = gm / gtot
    if precision + recall == 0.0:
        return 0.0, 0.0, 0.0
    f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def ipq(label_map: LabelMap) -> IpqRecord:
    """Mean isoperimetric quotient over the classes present in a map."""
    counts = label_map.class_counts()
    present = [cid for cid, n in counts.items() if n > 0]
    require(present, "label map has no scorable pixels")
    perimeters: dict[int, float] = {}
    areas: dict[int, int] = {}
    total = 0.0
    for cid in present:
        mask = class_mask(label_map, cid)
        perim = contour_perimeter(mask)
        perimeters[cid] = perim
        areas[cid] = counts[cid]
        total += perim * perim / counts[cid]
    n = len(present)
    return IpqRecord(perimeters, areas, n, total / (4.0 * math.pi * n))


class MetricAccumulator:
    """Mergeable tally of per-class counts across many image pairs."""

    def __init__(self) -> None:
        self.counts: dict[int, ClassCounts] = {}
        self.images_seen: int = 0

    def update(
        self, pred: LabelMap, gt: LabelMap, config: MetricConfig, image_id: str = ""
    ) -> EvalRecord:
        """Score one pair, add its counts, and return the per-image record."""
        record, per_class = _evaluate(pred, gt, config, image_id)
        for cid, counts in per_class.items():
            if cid in self.counts:
                self.counts[cid] = self.counts[cid] + counts
            else:
                self.counts[cid] = counts
        self.images_seen += 1
        return record

    def merge(self, other: "MetricAccumulator") -> "MetricAccumulator":
        """Combine two tallies into a new one; operands are untouched."""
        out = MetricAccumulator()
        for src in (self, other):
            for cid, counts in src.counts.items():
                if cid in out.counts:
                    out.counts[cid] = out.counts[cid] + counts
                else:
                    out.counts[cid] = counts + ClassCounts()
        out.images_seen = self.images_seen + other.images_seen
        return out

    def finalize(self) -> dict:
        """Per-class ratio-of-sums scores plus unweighted class means."""
        per_class: dict[int, ClassScores] = {}
        for cid in sorted(self.counts):
            c = self.counts[cid]
            if c.is_zero():
                continue
            per_class[cid] = _scores_from_counts(c)
        return {
            "per_class": per_class,
            "means": _class_means(per_class.values()),
            "images": self.images_seen,
        }

    def to_json_dict(self) -> dict:
        return {
            "images_seen": self.images_seen,
            "per_class": {str(cid): c.to_json_dict() for cid, c in sorted(self.counts.items())},
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "MetricAccumulator":
        acc = cls()
        acc.images_seen = int(obj["images_seen"])
        acc.counts = {
            int(cid): ClassCounts.from_json_dict(c) for cid, c in obj["per_class"].items()
        }
        return acc


def _scores_from_counts(c: ClassCounts) -> ClassScores:
    iou_score = c.iou_intersection / c.iou_union
    biou_score = c.biou_intersection / c.biou_union if c.biou_union > 0 else None
    if c.bf1_pred_total == 0 and c.bf1_gt_total == 0:
        precision = recall = f1 = None
    else:
        precision, recall, f1 = _bf1_from_counts(
            c.bf1_pred_matched, c.bf1_pred_total, c.bf1_gt_matched, c.bf1_gt_total
        )
    return ClassScores(iou_score, biou_score, precision, recall, f1)


def _class_means(scores: Iterable[ClassScores]) -> dict:
    ious: list[float] = []
    bious: list[float] = []
    bf1s: list[float] = []
    for s in scores:
        ious.append(s.iou)
        if s.biou is not None:
            bious.append(s.biou)
        if s.bf1 is not None:
            bf1s.append(s.bf1)

    def mean(vals: list[float]) -> float | None:
        return sum(vals) / len(vals) if vals else None

    return {"miou": mean(ious), "mbiou": mean(bious), "mbf1": mean(bf1s)}


def _evaluate(
    pred: LabelMap, gt: LabelMap, config: MetricConfig, image_id: str = ""
) -> tuple[EvalRecord, dict[int, ClassCounts]]:
    require(pred.data.shape == gt.data.shape, "prediction and reference dimensions differ")
    require(pred.table == gt.table, "prediction and reference class tables differ")
    require(
        config.classes == gt.table,
        "metric config class table differs from the maps",
    )
    d = config.effective_d(gt.width, gt.height)

    ignore = pred.ignore_mask() | gt.ignore_mask()
    valid = _valid_mask(ignore, gt.data.shape)

    present = sorted(set(pred.present_ids()) | set(gt.present_ids()))
    per_class: dict[int, ClassCounts] = {}
    scores: dict[int, ClassScores] = {}
    for cid in present:
        counts = _pair_class_counts(
            class_mask(pred, cid),
            class_mask(gt, cid),
            valid,
            d,
            config.bf1_tolerance,
        )
        if counts.is_zero():
            # the class survives only under ignore pixels; nothing to score
            continue
        per_class[cid] = counts
        scores[cid] = _scores_from_counts(counts)
    return EvalRecord(image_id, d, scores), per_class


def evaluate_pair(
    pred: LabelMap, gt: LabelMap, config: MetricConfig | None = None, image_id: str = ""
) -> EvalRecord:
    """Score one prediction against its reference.

    Classes appearing in neither map (outside ignore) are absent from
    the record. A prediction identical to the reference scores exactly
    1.0 on every defined metric of every present class.
    """
    cfg = config if config is not None else MetricConfig()
    record, _ = _evaluate(pred, gt, cfg, image_id)
    return record


def accumulate(
    acc: MetricAccumulator, pred: LabelMap, gt: LabelMap, config: MetricConfig
) -> MetricAccumulator:
    """Fold one pair into a running tally; returns the same accumulator."""
    acc.update(pred, gt, config)
    return acc
