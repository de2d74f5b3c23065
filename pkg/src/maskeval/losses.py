"""Forward-only reference evaluators for edge-emphasis training losses.

No gradients here: these produce reference numbers and dataset-side
weight products, not differentiable training terms.

The weight map of a binary mask is its deviation from a local average,
``W = G - box_filter(G, k)`` with replicate padding. It is zero wherever
the k-window is label-constant, positive just inside a boundary,
negative just outside, always within [-1, 1]. Losses scale per-pixel
BCE by ``max(0, 1 + lam * W)``, so boundary pixels weigh more and the
factor never goes negative (a negative weight would reward errors).

The re-weighted variant for merged pseudo labels splits classes in two:
precisely annotated classes keep the boost ``max(0, 1 + lam1 * W_j)``
while pseudo-labeled classes get the inverse ``max(0, 1 - lam2 * W_j)``,
damping supervision exactly where their boundaries are least reliable.
Its result is a sum over class maps; the uniform evaluator averages.

Classification-head terms are out of scope; reports flag the omission.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import (
    BinaryMask,
    ClassTable,
    LabelMap,
    ProbMap,
    ProbStack,
    ValidationError,
    WeightMap,
    class_mask,
    require,
)
from .morphology import box_filter, semantic_edges

__all__ = [
    "LossConfig",
    "LossReport",
    "ClassLossBreakdown",
    "weight_map",
    "weighted_bce",
    "dice_loss",
    "edge_loss",
    "new_class_bce",
    "total_loss",
]


@dataclass(frozen=True)
class LossConfig:
    """Knobs for the loss evaluators.

    lam scales the uniform edge emphasis, lam1 the boost on precisely
    annotated classes, lam2 (in [0, 1]) the damping on pseudo classes.
    edge_radius widens the contour target for the edge head; 0 keeps
    the raw two-sided one-pixel edges.
    """

    k: int = 15
    lam: float = 1.0
    lam1: float = 1.0
    lam2: float = 1.0
    epsilon: float = 1e-7
    precise_classes: frozenset[int] = frozenset(range(1, 7))
    pseudo_classes: frozenset[int] = frozenset({0})
    edge_radius: int = 0

    def __post_init__(self) -> None:
        require(self.k >= 1 and self.k % 2 == 1, "k must be an odd positive integer")
        require(self.lam >= 0.0, "lam must be non-negative")
        require(self.lam1 >= 0.0, "lam1 must be non-negative")
        require(0.0 <= self.lam2 <= 1.0, "lam2 must lie in [0, 1]")
        require(0.0 < self.epsilon < 0.5, "epsilon must lie in (0, 0.5)")
        # frozenset() accepts iterables; normalize so equality behaves
        object.__setattr__(self, "precise_classes", frozenset(int(c) for c in self.precise_classes))
        object.__setattr__(self, "pseudo_classes", frozenset(int(c) for c in self.pseudo_classes))
        require(
            not (self.precise_classes & self.pseudo_classes),
            "precise and pseudo class sets must be disjoint",
        )
        require(self.edge_radius >= 0, "edge_radius must be non-negative")

    def for_table(self, table: ClassTable) -> "LossConfig":
        """Restrict the class split to a table: ids 1..6 stay precise,
        id 0 and every extension id (>= 7) count as pseudo."""
        ids = set(table.ids())
        return LossConfig(
            k=self.k,
            lam=self.lam,
            lam1=self.lam1,
            lam2=self.lam2,
            epsilon=self.epsilon,
            precise_classes=frozenset(c for c in ids if 1 <= c <= 6),
            pseudo_classes=frozenset(c for c in ids if c == 0 or c >= 7),
            edge_radius=self.edge_radius,
        )

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "lam": self.lam,
            "lam1": self.lam1,
            "lam2": self.lam2,
            "epsilon": self.epsilon,
            "precise_classes": sorted(self.precise_classes),
            "pseudo_classes": sorted(self.pseudo_classes),
            "edge_radius": self.edge_radius,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "LossConfig":
        return cls(
            k=int(obj["k"]),
            lam=float(obj["lam"]),
            lam1=float(obj["lam1"]),
            lam2=float(obj["lam2"]),
            epsilon=float(obj["epsilon"]),
            precise_classes=frozenset(int(c) for c in obj["precise_classes"]),
            pseudo_classes=frozenset(int(c) for c in obj["pseudo_classes"]),
            edge_radius=int(obj.get("edge_radius", 0)),
        )


@dataclass(frozen=True)
class ClassLossBreakdown:
    class_id: int
    bce: float
    dice: float

    def to_json_dict(self) -> dict:
        return {"class_id": self.class_id, "bce": self.bce, "dice": self.dice}


@dataclass(frozen=True)
class LossReport:
    """Evaluated loss terms; total_partial = bce_weighted + dice + edge."""

    bce_weighted: float
    dice: float
    edge: float
    total_partial: float
    per_class: tuple[ClassLossBreakdown, ...]
    omitted_terms: tuple[str, ...] = ("classification",)

    def to_json_dict(self) -> dict:
        return {
            "bce_weighted": self.bce_weighted,
            "dice": self.dice,
            "edge": self.edge,
            "total_partial": self.total_partial,
            "per_class": [c.to_json_dict() for c in self.per_class],
            "omitted_terms": list(self.omitted_terms),
        }


def _as_float_mask(gt: np.ndarray) -> np.ndarray:
    if gt.dtype == np.bool_:
        return gt.astype(np.float64)
    arr = np.asarray(gt, dtype=np.float64)
    require(np.isfinite(arr).all(), "mask values must be finite")
    require(arr.min() >= 0.0 and arr.max() <= 1.0, "mask values must lie in [0, 1]")
    return arr


def weight_map(gt: BinaryMask, k: int) -> WeightMap:
    """W = G - box_filter(G, k): signed boundary emphasis in [-1, 1]."""
    require(gt.ndim == 2, "mask must be 2-dimensional")
    g = _as_float_mask(gt)
    return g - box_filter(g, k)


def _bce_elements(pred: np.ndarray, gt: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-pixel binary cross-entropy with the probability clamp."""
    p = np.clip(pred.astype(np.float64, copy=False), epsilon, 1.0 - epsilon)
    g = gt.astype(np.float64, copy=False)
    return -(g * np.log(p) + (1.0 - g) * np.log1p(-p))


def _check_prob_input(pred: np.ndarray, gt: np.ndarray) -> None:
    require(pred.ndim in (2, 3), "probability input must be 2- or 3-dimensional")
    require(pred.shape == gt.shape, "prediction and target dimensions differ")


def weighted_bce(
    pred: ProbMap, gt: BinaryMask, w: WeightMap, lam: float, epsilon: float = 1e-7
) -> float:
    """Mean BCE scaled per pixel by max(0, 1 + lam*W).

    Accepts a single map or a stack of maps; a stack averages over all
    maps and pixels together (one flat 1/(m*n) mean), and then W must
    carry one weight map per input map.
    """
    _check_prob_input(pred, gt)
    require(w.shape == pred.shape, "weight map dimensions differ from the prediction")
    require(lam >= 0.0, "lam must be non-negative")
    require(0.0 < epsilon < 0.5, "epsilon must lie in (0, 0.5)")
    factors = np.maximum(0.0, 1.0 + lam * w.astype(np.float64, copy=False))
    return float(np.mean(_bce_elements(pred, gt, epsilon) * factors))


def dice_loss(pred: ProbMap, gt: BinaryMask, epsilon: float = 1e-7) -> float:
    """1 - (2*sum(P*G) + eps) / (sum(P) + sum(G) + eps).

    A stack of maps yields the mean of the per-map losses.
    """
    _check_prob_input(pred, gt)
    require(epsilon > 0.0, "epsilon must be positive")
    p = pred.astype(np.float64, copy=False)
    g = gt.astype(np.float64, copy=False)
    if pred.ndim == 2:
        p = p[None]
        g = g[None]
    overlap = (p * g).sum(axis=(1, 2))
    sizes = p.sum(axis=(1, 2)) + g.sum(axis=(1, 2))
    losses = 1.0 - (2.0 * overlap + epsilon) / (sizes + epsilon)
    return float(losses.mean())


def edge_loss(pred_edge: ProbMap, gt_edge: BinaryMask, epsilon: float = 1e-7) -> float:
    """Plain mean BCE of an edge probability map against binary edges."""
    _check_prob_input(pred_edge, gt_edge)
    require(0.0 < epsilon < 0.5, "epsilon must lie in (0, 0.5)")
    return float(np.mean(_bce_elements(pred_edge, gt_edge, epsilon)))


def _stack_targets_and_weights(
    pred: ProbStack, gt: LabelMap, k: int
) -> tuple[list[int], np.ndarray, np.ndarray]:
    require(
        pred.maps.shape[1:] == gt.data.shape,
        "probability stack and label map dimensions differ",
    )
    require(pred.table == gt.table, "probability stack and label map class tables differ")
    ids = list(pred.table.ids())
    targets = np.empty(pred.maps.shape, dtype=np.float64)
    weights = np.empty(pred.maps.shape, dtype=np.float64)
    for j, cid in enumerate(ids):
        mask = class_mask(gt, cid)
        targets[j] = mask
        weights[j] = weight_map(mask, k)
    return ids, targets, weights


def new_class_bce(pred: ProbStack, gt: LabelMap, cfg: LossConfig) -> LossReport:
    """Class-split re-weighted BCE, summed over class maps.

    Precise classes use max(0, 1 + lam1*W_j), pseudo classes the inverse
    max(0, 1 - lam2*W_j), each W_j from that class's reference mask.
    Every class id in the table must fall in exactly one of the two
    sets. The dice and edge terms are not part of this evaluator and
    report as zero.
    """
    ids, targets, weights = _stack_targets_and_weights(pred, gt, cfg.k)
    covered = cfg.precise_classes | cfg.pseudo_classes
    missing = [cid for cid in ids if cid not in covered]
    if missing:
        raise ValidationError(
            f"classes {missing} belong to neither the precise nor the pseudo set"
        )

    per_class: list[ClassLossBreakdown] = []
    total = 0.0
    for j, cid in enumerate(ids):
        if cid in cfg.precise_classes:
            factor = np.maximum(0.0, 1.0 + cfg.lam1 * weights[j])
        else:
            factor = np.maximum(0.0, 1.0 - cfg.lam2 * weights[j])
        bce_j = float(np.mean(_bce_elements(pred.maps[j], targets[j], cfg.epsilon) * factor))
        per_class.append(ClassLossBreakdown(cid, bce_j, 0.0))
        total += bce_j
    return LossReport(total, 0.0, 0.0, total, tuple(per_class))


def total_loss(
    pred: ProbStack, pred_edge: ProbMap | None, gt: LabelMap, cfg: LossConfig
) -> LossReport:
    """Weighted BCE + dice + edge terms over a full probability stack.

    Per-class means average into the flat 1/(m*n) weighted BCE; dice is
    the mean of per-class dice losses. The edge target comes from the
    label map's class contours widened by cfg.edge_radius. Passing
    pred_edge=None skips the edge term (it contributes 0.0).
    """
    ids, targets, weights = _stack_targets_and_weights(pred, gt, cfg.k)

    # headline terms reuse the component evaluators verbatim so that
    # total_loss agrees with separate invocations bit for bit
    bce = weighted_bce(pred.maps, targets, weights, cfg.lam, cfg.epsilon)
    dice = dice_loss(pred.maps, targets, cfg.epsilon)
    if pred_edge is None:
        edge = 0.0
    else:
        gt_edge = semantic_edges(gt, cfg.edge_radius)
        edge = edge_loss(pred_edge, gt_edge, cfg.epsilon)

    per_class: list[ClassLossBreakdown] = []
    for j, cid in enumerate(ids):
        factor = np.maximum(0.0, 1.0 + cfg.lam * weights[j])
        bce_j = float(np.mean(_bce_elements(pred.maps[j], targets[j], cfg.epsilon) * factor))
        dice_j = dice_loss(pred.maps[j], targets[j], cfg.epsilon)
        per_class.append(ClassLossBreakdown(cid, bce_j, dice_j))
    return LossReport(bce, dice, edge, bce + dice + edge, tuple(per_class))
