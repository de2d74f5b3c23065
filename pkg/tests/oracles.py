"""Independent reference implementations used to check the package.

Everything here is deliberately naive: all-pairs distance scans,
double-loop window means, and scalar accumulation with math.log. None
of it shares algorithms or code with the package under test. Sizes are
expected to stay small (tests use rasters up to 64x64).
"""

from __future__ import annotations

import math

import numpy as np


def sqdist_all_pairs(query: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Exact squared distance from every query pixel to the nearest
    source pixel, by scanning every (query, source) pair."""
    out = np.full(query.shape, np.iinfo(np.int64).max, dtype=np.int64)
    src = np.argwhere(source)
    if src.size == 0:
        return out
    qr, qc = np.nonzero(query)
    if qr.size == 0:
        return out
    dr = qr[:, None].astype(np.int64) - src[None, :, 0]
    dc = qc[:, None].astype(np.int64) - src[None, :, 1]
    out[qr, qc] = (dr * dr + dc * dc).min(axis=1)
    return out


def sqdist_to_complement(mask: np.ndarray) -> np.ndarray:
    """All-pairs squared distance from mask pixels to the complement,
    counting the region outside the frame as complement."""
    padded = np.pad(mask, 1, constant_values=False)
    dsq = sqdist_all_pairs(padded, ~padded)
    return dsq[1:-1, 1:-1]


def band(mask: np.ndarray, d: float) -> np.ndarray:
    if d < 1 or not mask.any():
        return np.zeros(mask.shape, dtype=bool)
    dsq = sqdist_to_complement(mask)
    return mask & (dsq <= d * d)


def inner_boundary(mask: np.ndarray) -> np.ndarray:
    """Mask pixels with a 4-neighbor outside the mask or outside the frame."""
    H, W = mask.shape
    out = np.zeros_like(mask)
    for r in range(H):
        for c in range(W):
            if not mask[r, c]:
                continue
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, cc = r + dr, c + dc
                if rr < 0 or rr >= H or cc < 0 or cc >= W or not mask[rr, cc]:
                    out[r, c] = True
                    break
    return out


def bf1(pred: np.ndarray, gt: np.ndarray, tol: float) -> tuple[float, float, float]:
    """Boundary F1 by matching every contour pixel against every other."""
    bp = np.argwhere(inner_boundary(pred))
    bg = np.argwhere(inner_boundary(gt))
    if len(bp) == 0 and len(bg) == 0:
        return 1.0, 1.0, 1.0
    if len(bp) == 0 or len(bg) == 0:
        return 0.0, 0.0, 0.0
    t2 = tol * tol

    def matched(points, targets) -> int:
        n = 0
        for p in points:
            best = min((p[0] - t[0]) ** 2 + (p[1] - t[1]) ** 2 for t in targets)
            if best <= t2:
                n += 1
        return n

    precision = matched(bp, bg) / len(bp)
    recall = matched(bg, bp) / len(bg)
    if precision + recall == 0.0:
        return 0.0, 0.0, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def box_filter(field: np.ndarray, k: int) -> np.ndarray:
    """Replicate-padded k-window mean by looping over every window."""
    H, W = field.shape
    half = k // 2
    out = np.zeros((H, W), dtype=np.float64)
    for r in range(H):
        for c in range(W):
            total = 0.0
            for dr in range(-half, half + 1):
                for dc in range(-half, half + 1):
                    rr = min(max(r + dr, 0), H - 1)
                    cc = min(max(c + dc, 0), W - 1)
                    total += float(field[rr, cc])
            out[r, c] = total / (k * k)
    return out


def weight_map(mask: np.ndarray, k: int) -> np.ndarray:
    return mask.astype(np.float64) - box_filter(mask.astype(np.float64), k)


def bce_term(p: float, g: float, eps: float) -> float:
    p = min(max(p, eps), 1.0 - eps)
    return -(g * math.log(p) + (1.0 - g) * math.log1p(-p))


def weighted_bce(pred, gt, w, lam: float, eps: float) -> float:
    """Scalar-loop weighted BCE over a 2D map or a stack of maps."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if pred.ndim == 2:
        pred, gt, w = pred[None], gt[None], w[None]
    total = 0.0
    count = 0
    for j in range(pred.shape[0]):
        for r in range(pred.shape[1]):
            for c in range(pred.shape[2]):
                factor = max(0.0, 1.0 + lam * w[j, r, c])
                total += bce_term(pred[j, r, c], gt[j, r, c], eps) * factor
                count += 1
    return total / count


def dice_loss(pred, gt, eps: float) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.ndim == 2:
        pred, gt = pred[None], gt[None]
    losses = []
    for j in range(pred.shape[0]):
        overlap = 0.0
        sizes = 0.0
        for r in range(pred.shape[1]):
            for c in range(pred.shape[2]):
                overlap += pred[j, r, c] * gt[j, r, c]
                sizes += pred[j, r, c] + gt[j, r, c]
        losses.append(1.0 - (2.0 * overlap + eps) / (sizes + eps))
    return sum(losses) / len(losses)


def edge_loss(pred, gt, eps: float) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    total = 0.0
    for r in range(pred.shape[0]):
        for c in range(pred.shape[1]):
            total += bce_term(pred[r, c], gt[r, c], eps)
    return total / pred.size


def new_class_bce(maps, class_ids, gt_data, precise, pseudo, k, lam1, lam2, eps) -> float:
    """Scalar-loop class-split BCE; weight maps via the loop box filter."""
    total = 0.0
    for j, cid in enumerate(class_ids):
        g = (gt_data == cid).astype(np.float64)
        w = g - box_filter(g, k)
        class_total = 0.0
        for r in range(g.shape[0]):
            for c in range(g.shape[1]):
                if cid in precise:
                    factor = max(0.0, 1.0 + lam1 * w[r, c])
                else:
                    factor = max(0.0, 1.0 - lam2 * w[r, c])
                class_total += bce_term(float(maps[j, r, c]), g[r, c], eps) * factor
        total += class_total / g.size
    return total


def semantic_edges(data: np.ndarray, ignore_id: int, radius: int) -> np.ndarray:
    """Two-sided class contours by checking every 4-neighbor pair, then
    widening with the all-pairs distance scan."""
    H, W = data.shape
    base = np.zeros((H, W), dtype=bool)
    for r in range(H):
        for c in range(W):
            if data[r, c] == ignore_id:
                continue
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < H and 0 <= cc < W:
                    if data[rr, cc] != ignore_id and data[rr, cc] != data[r, c]:
                        base[r, c] = True
                        break
    if radius <= 0 or not base.any():
        return base
    dsq = sqdist_all_pairs(np.ones((H, W), dtype=bool), base)
    return dsq <= radius * radius


def stats_two_pass(diags: list[float], mipqs: list[float]) -> tuple[float, float, float, float]:
    """Mean and population std by the direct two-pass formula."""

    def mean_std(vals: list[float]) -> tuple[float, float]:
        n = len(vals)
        mean = sum(vals) / n
        var = sum((v - mean) ** 2 for v in vals) / n
        return mean, math.sqrt(var)

    dm, ds = mean_std(diags)
    mm, ms = mean_std(mipqs)
    return dm, ds, mm, ms
