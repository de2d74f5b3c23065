"""Dataset-side pseudo-label curation and corpus statistics.

Externally produced pseudo masks (any detector or promptable segmenter,
run elsewhere) are merged into precisely annotated label maps as a new
extension class. Precise labels win by default: only classes listed as
replaceable give up pixels, and everything else is a recorded conflict.
Training-side products are per-class factor maps, already clamped, so
external consumers never need the clamp convention.

Corpus statistics accumulate in mergeable partial moments (count, sum,
sum of squares), so shards processed in parallel finalize to the same
numbers as one sequential pass. Standard deviations are population
(divide by N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import (
    BinaryMask,
    ClassTable,
    LabelMap,
    ValidationError,
    WeightMap,
    class_mask,
    require,
)
from .losses import LossConfig, weight_map
from .metrics import ipq

__all__ = [
    "MergePolicy",
    "MergeReport",
    "DatasetStats",
    "StatsAccumulator",
    "merge_pseudo",
    "emit_training_weights",
    "dataset_stats",
]

CONFLICT_CHOICES = ("skip", "override", "error")


@dataclass(frozen=True)
class MergePolicy:
    """How pseudo pixels enter a label map.

    Pixels whose current class is replaceable become new_class_id; the
    rest are conflicts, resolved by conflict_handling: "skip" keeps the
    existing label, "override" rewrites it anyway (ignore pixels
    included), "error" refuses the merge.
    """

    new_class_id: int
    new_class_name: str = "new_class"
    replaceable: frozenset[int] = frozenset({0})
    conflict_handling: str = "skip"

    def __post_init__(self) -> None:
        require(
            7 <= self.new_class_id <= 255,
            "new_class_id must be an extension id (7..255)",
        )
        require(bool(self.new_class_name), "new_class_name must be non-empty")
        object.__setattr__(self, "replaceable", frozenset(int(c) for c in self.replaceable))
        require(
            self.conflict_handling in CONFLICT_CHOICES,
            f"conflict_handling must be one of {CONFLICT_CHOICES}",
        )


@dataclass(frozen=True)
class MergeReport:
    """Pixel bookkeeping for one merge.

    Under "skip", assigned + skipped_conflicts equals the pseudo mask's
    popcount. conflicts maps the class id that held its ground (or was
    overridden) to how many pseudo pixels hit it; the ignore id shows
    up here too.
    """

    assigned: int
    skipped_conflicts: int
    conflicts: dict[int, int]

    def to_json_dict(self) -> dict:
        return {
            "assigned": self.assigned,
            "skipped_conflicts": self.skipped_conflicts,
            "conflicts": {str(cid): n for cid, n in sorted(self.conflicts.items())},
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "MergeReport":
        return cls(
            assigned=int(obj["assigned"]),
            skipped_conflicts=int(obj["skipped_conflicts"]),
            conflicts={int(cid): int(n) for cid, n in obj["conflicts"].items()},
        )


def _extended_table(table: ClassTable, policy: MergePolicy) -> ClassTable:
    """Extend with the new class; a table that already carries it under
    the same name passes through, which keeps repeated merges legal."""
    cid = policy.new_class_id
    if cid in table:
        require(
            table.name_of(cid) == policy.new_class_name,
            f"class id {cid} already names '{table.name_of(cid)}'",
        )
        return table
    return table.with_new_class(policy.new_class_name, cid)


def merge_pseudo(
    gt: LabelMap, pseudo: BinaryMask, policy: MergePolicy
) -> tuple[LabelMap, MergeReport]:
    """Fold one pseudo-positive mask into a label map as the new class.

    Pixels outside the pseudo mask are never altered. The output table
    always carries the new class, even for an empty pseudo mask.
    """
    require(pseudo.dtype == np.bool_ and pseudo.ndim == 2, "pseudo mask must be a 2D bool array")
    require(pseudo.shape == gt.data.shape, "pseudo mask dimensions differ from the label map")
    missing = sorted(policy.replaceable - set(gt.table.ids()))
    require(not missing, f"replaceable ids {missing} are not in the class table")
    table = _extended_table(gt.table, policy)

    lut = np.zeros(256, dtype=bool)
    lut[list(policy.replaceable)] = True
    replace = pseudo & lut[gt.data]
    conflict = pseudo & ~replace

    ids, counts = np.unique(gt.data[conflict], return_counts=True)
    conflicts = {int(i): int(n) for i, n in zip(ids, counts)}
    n_conflict = int(conflict.sum())

    if policy.conflict_handling == "error" and n_conflict:
        raise ValidationError(
            f"{n_conflict} pseudo pixels collide with non-replaceable classes {sorted(conflicts)}"
        )

    data = gt.data.copy()
    if policy.conflict_handling == "override":
        data[pseudo] = np.uint8(policy.new_class_id)
        report = MergeReport(int(pseudo.sum()), 0, conflicts)
    else:
        data[replace] = np.uint8(policy.new_class_id)
        report = MergeReport(int(replace.sum()), n_conflict, conflicts)
    return LabelMap(data, table), report


def emit_training_weights(gt: LabelMap, cfg: LossConfig) -> list[tuple[int, WeightMap]]:
    """Per-class clamped factor rasters for an external trainer.

    Precise classes get max(0, 1 + lam1*W_j), pseudo classes
    max(0, 1 - lam2*W_j). Every table id must fall in one of the sets.
    """
    covered = cfg.precise_classes | cfg.pseudo_classes
    missing = [cid for cid in gt.table.ids() if cid not in covered]
    if missing:
        raise ValidationError(
            f"classes {missing} belong to neither the precise nor the pseudo set"
        )
    out: list[tuple[int, WeightMap]] = []
    for cid in gt.table.ids():
        w = weight_map(class_mask(gt, cid), cfg.k)
        if cid in cfg.precise_classes:
            factor = np.maximum(0.0, 1.0 + cfg.lam1 * w)
        else:
            factor = np.maximum(0.0, 1.0 - cfg.lam2 * w)
        out.append((cid, factor))
    return out


@dataclass(frozen=True)
class DatasetStats:
    """Corpus summary: size and complexity moments plus the class mix."""

    diag_mean: float
    diag_std: float
    mipq_mean: float
    mipq_std: float
    pixel_fraction: dict[int, float]
    class_count_hist: dict[int, int]
    image_count: int

    def to_json_dict(self) -> dict:
        return {
            "diag_mean": self.diag_mean,
            "diag_std": self.diag_std,
            "mipq_mean": self.mipq_mean,
            "mipq_std": self.mipq_std,
            "pixel_fraction": {str(c): f for c, f in sorted(self.pixel_fraction.items())},
            "class_count_hist": {str(c): n for c, n in sorted(self.class_count_hist.items())},
            "image_count": self.image_count,
        }


class StatsAccumulator:
    """Mergeable partial moments over a stream of label maps."""

    def __init__(self) -> None:
        self.image_count = 0
        self.diag_sum = 0.0
        self.diag_sumsq = 0.0
        self.mipq_sum = 0.0
        self.mipq_sumsq = 0.0
        self.pixel_counts: dict[int, int] = {}
        self.class_count_hist: dict[int, int] = {}

    def update(self, label_map: LabelMap) -> None:
        diag = label_map.diagonal()
        mipq = ipq(label_map).mipq
        self.image_count += 1
        self.diag_sum += diag
        self.diag_sumsq += diag * diag
        self.mipq_sum += mipq
        self.mipq_sumsq += mipq * mipq
        counts = label_map.class_counts()
        present = 0
        for cid, n in counts.items():
            self.pixel_counts[cid] = self.pixel_counts.get(cid, 0) + n
            if n > 0:
                present += 1
        self.class_count_hist[present] = self.class_count_hist.get(present, 0) + 1

    def merge(self, other: "StatsAccumulator") -> "StatsAccumulator":
        out = StatsAccumulator()
        out.image_count = self.image_count + other.image_count
        out.diag_sum = self.diag_sum + other.diag_sum
        out.diag_sumsq = self.diag_sumsq + other.diag_sumsq
        out.mipq_sum = self.mipq_sum + other.mipq_sum
        out.mipq_sumsq = self.mipq_sumsq + other.mipq_sumsq
        for src in (self, other):
            for cid, n in src.pixel_counts.items():
                out.pixel_counts[cid] = out.pixel_counts.get(cid, 0) + n
            for k, n in src.class_count_hist.items():
                out.class_count_hist[k] = out.class_count_hist.get(k, 0) + n
        return out

    def finalize(self) -> DatasetStats:
        require(self.image_count > 0, "no label maps were accumulated")
        n = self.image_count
        diag_mean = self.diag_sum / n
        mipq_mean = self.mipq_sum / n

        def pop_std(sumsq: float, mean: float) -> float:
            return float(np.sqrt(max(0.0, sumsq / n - mean * mean)))

        total_pixels = sum(self.pixel_counts.values())
        fractions = {cid: cnt / total_pixels for cid, cnt in sorted(self.pixel_counts.items())}
        return DatasetStats(
            diag_mean=diag_mean,
            diag_std=pop_std(self.diag_sumsq, diag_mean),
            mipq_mean=mipq_mean,
            mipq_std=pop_std(self.mipq_sumsq, mipq_mean),
            pixel_fraction=fractions,
            class_count_hist=dict(sorted(self.class_count_hist.items())),
            image_count=n,
        )

    def to_json_dict(self) -> dict:
        return {
            "image_count": self.image_count,
            "diag_sum": self.diag_sum,
            "diag_sumsq": self.diag_sumsq,
            "mipq_sum": self.mipq_sum,
            "mipq_sumsq": self.mipq_sumsq,
            "pixel_counts": {str(c): n for c, n in sorted(self.pixel_counts.items())},
            "class_count_hist": {str(c): n for c, n in sorted(self.class_count_hist.items())},
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "StatsAccumulator":
        acc = cls()
        acc.image_count = int(obj["image_count"])
        acc.diag_sum = float(obj["diag_sum"])
        acc.diag_sumsq = float(obj["diag_sumsq"])
        acc.mipq_sum = float(obj["mipq_sum"])
        acc.mipq_sumsq = float(obj["mipq_sumsq"])
        acc.pixel_counts = {int(c): int(n) for c, n in obj["pixel_counts"].items()}
        acc.class_count_hist = {int(c): int(n) for c, n in obj["class_count_hist"].items()}
        return acc


def dataset_stats(maps: Iterable[LabelMap]) -> DatasetStats:
    """Single-pass corpus statistics over a stream of label maps."""
    acc = StatsAccumulator()
    for label_map in maps:
        acc.update(label_map)
    return acc.finalize()
