"""Vectorized numpy/scipy geometry kernels (fallback backend).

Same contract as the numba backend. Distances come from scipy's exact
Euclidean feature transform with the squared distance recomputed in int64
from the feature indices, so results are bit-identical to the numba path.
Contour tracing runs in plain Python over border pixels only.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=np.uint8)
# Moore neighborhood, clockwise from East: E SE S SW W NW N NE.
_NBR = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))
_SQRT2 = math.sqrt(2.0)


def squared_edt(source: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance to the nearest True pixel."""
    idx = ndimage.distance_transform_edt(
        ~source, return_distances=False, return_indices=True
    )
    ii, jj = np.indices(source.shape)
    di = ii.astype(np.int64) - idx[0]
    dj = jj.astype(np.int64) - idx[1]
    return di * di + dj * dj


def sqdist_capped(source: np.ndarray, cap: int) -> np.ndarray:
    """Squared distance, exact up to cap² (full field here; cap advisory)."""
    return squared_edt(source)


def _trace_border(mask: np.ndarray, sr: int, sc: int, back: int) -> float:
    """Chain-code length of one Moore-traced border (Jacob's criterion)."""
    H, W = mask.shape
    length = 0.0
    r, c, d = sr, sc, back
    first_move = -1
    steps = 0
    limit = 8 * mask.size + 8
    while True:
        found = -1
        for k in range(1, 9):
            nd = (d + k) % 8
            nr = r + _NBR[nd][0]
            nc = c + _NBR[nd][1]
            if 0 <= nr < H and 0 <= nc < W and mask[nr, nc]:
                found = nd
                break
        if found < 0:
            return 0.0
        if r == sr and c == sc:
            if first_move < 0:
                first_move = found
            elif found == first_move and steps > 0:
                return length
        length += 1.0 if found % 2 == 0 else _SQRT2
        r += _NBR[found][0]
        c += _NBR[found][1]
        d = (found + 4) % 8
        steps += 1
        if steps > limit:
            return length  # unreachable guard against tracer runaway
    return length


def _raster_first(labels: np.ndarray, n: int) -> np.ndarray:
    """Row-major first pixel of each label 1..n as an (n, 2) array."""
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    firsts = np.searchsorted(flat[order], np.arange(1, n + 1))
    idx = order[firsts]
    return np.stack(np.unravel_index(idx, labels.shape), axis=1)


def perimeter_total(mask: np.ndarray) -> float:
    """Total chain-code perimeter over all components and their holes."""
    H, W = mask.shape
    if H == 0 or W == 0 or not mask.any():
        return 0.0
    padded = np.zeros((H + 2, W + 2), dtype=bool)
    padded[1 : H + 1, 1 : W + 1] = mask

    total = 0.0
    labels, n = ndimage.label(padded, structure=_EIGHT)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    for comp, (sr, sc) in enumerate(_raster_first(labels, n), start=1):
        if sizes[comp] == 1:
            total += 4.0  # crack convention for isolated pixels
        else:
            total += _trace_border(padded, int(sr), int(sc), 4)  # backtrack West

    bg_labels, bn = ndimage.label(~padded)  # default structure: 4-connectivity
    outside = bg_labels[0, 0]
    for hole, (sr, sc) in enumerate(_raster_first(bg_labels, bn), start=1):
        if hole == outside:
            continue
        # The pixel above a hole's raster-first pixel is always mask.
        total += _trace_border(padded, int(sr) - 1, int(sc), 2)  # backtrack South
    return total
