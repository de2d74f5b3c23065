"""Numba-compiled geometry kernels.

Same contract as the numpy backend (see package docstring). Distance
arithmetic is integer throughout; floats appear only in chain-code step
lengths. The full transform returns int64; the capped transform returns
int32, which holds 2*(cap+1)^2+1 for every radius the callers allow.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Moore neighborhood in clockwise order starting East, (row, col) with row
# increasing downward: E SE S SW W NW N NE.
_NBR_R = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)
_NBR_C = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)
_SQRT2 = math.sqrt(2.0)


@njit(cache=True)
def squared_edt(source):
    """Exact squared Euclidean distance to the nearest True pixel.

    Two passes: per-column nearest-source row distance, then a 1D
    lower-envelope pass along each row (integer arithmetic throughout,
    floor-division separators), so results are exact for any image whose
    squared diagonal fits in int64.
    """
    H, W = source.shape
    big = H + W  # exceeds any true pixel distance
    g = np.empty((H, W), np.int64)
    for j in range(W):
        g[0, j] = 0 if source[0, j] else big
    for i in range(1, H):
        for j in range(W):
            if source[i, j]:
                g[i, j] = 0
            else:
                g[i, j] = g[i - 1, j] + 1
    for i in range(H - 2, -1, -1):
        for j in range(W):
            v = g[i + 1, j] + 1
            if v < g[i, j]:
                g[i, j] = v

    out = np.empty((H, W), np.int64)
    s = np.empty(W, np.int64)  # envelope parabola sites
    t = np.empty(W, np.int64)  # earliest column each site dominates
    for i in range(H):
        q = 0
        s[0] = 0
        t[0] = 0
        for u in range(1, W):
            gu2 = g[i, u] * g[i, u]
            while q >= 0:
                x = t[q]
                sq = s[q]
                dx = x - sq
                if dx * dx + g[i, sq] * g[i, sq] <= (x - u) * (x - u) + gu2:
                    break
                q -= 1
            if q < 0:
                q = 0
                s[0] = u
            else:
                sq = s[q]
                # first column where parabola u beats parabola s[q]
                w = 1 + (u * u - sq * sq + gu2 - g[i, sq] * g[i, sq]) // (2 * (u - sq))
                if w < W:
                    q += 1
                    s[q] = u
                    t[q] = w
        for u in range(W - 1, -1, -1):
            sq = s[q]
            du = u - sq
            out[i, u] = du * du + g[i, sq] * g[i, sq]
            if u == t[q]:
                q -= 1
    return out


@njit(cache=True)
def sqdist_capped(source, cap):
    """Squared distance to the nearest True pixel, exact up to cap².

    Any pixel whose true squared distance exceeds cap*cap may receive an
    arbitrary value > cap*cap. Runs in O(H*W*cap) worst case via a capped
    column pass and a windowed row scan, so it is the cheap path for small
    radii. The column field is int16 and the result int32 to keep the pass
    memory-light on large frames; both hold every value for cap <= 32766.
    """
    H, W = source.shape
    far = cap + 1
    big = np.int32(2 * far * far + 1)
    g = np.empty((H, W), np.int16)
    for j in range(W):
        g[0, j] = 0 if source[0, j] else far
    for i in range(1, H):
        for j in range(W):
            if source[i, j]:
                g[i, j] = 0
            else:
                v = g[i - 1, j] + 1
                g[i, j] = v if v < far else far

    # Finalize each column bottom-up one row at a time and scan that row
    # immediately, while it is still in cache. A row's scan only needs its
    # own finalized column distances, so no second full sweep is required.
    out = np.empty((H, W), np.int32)
    for i in range(H - 1, -1, -1):
        if i < H - 1:
            for j in range(W):
                v = g[i + 1, j] + 1
                if v < g[i, j]:
                    g[i, j] = v
        # live = columns in the current window holding any source within
        # `cap` rows; windows with none can only see values beyond cap².
        live = 0
        top = cap if cap < W - 1 else W - 1
        for u in range(top + 1):
            if g[i, u] < far:
                live += 1
        for j in range(W):
            if j > 0:
                enter = j + cap
                if enter < W and g[i, enter] < far:
                    live += 1
                leave = j - cap - 1
                if leave >= 0 and g[i, leave] < far:
                    live -= 1
            if live == 0:
                out[i, j] = big
                continue
            lo = j - cap
            if lo < 0:
                lo = 0
            hi = j + cap
            if hi >= W:
                hi = W - 1
            m = np.int64(big)
            for u in range(lo, hi + 1):
                gv = np.int64(g[i, u])
                if gv >= far:
                    continue
                du = u - j
                cand = du * du + gv * gv
                if cand < m:
                    m = cand
            out[i, j] = m
    return out


@njit(cache=True)
def _flood(cells, labels, seed_r, seed_c, label, want, eight, stack):
    """Label the connected region of `want`-valued cells containing the seed.

    Returns the region size. `stack` is a caller-provided int64 scratch
    array of flat indices, at least cells.size long.
    """
    H, W = cells.shape
    top = 0
    stack[0] = seed_r * W + seed_c
    top = 1
    labels[seed_r, seed_c] = label
    size = 0
    while top > 0:
        top -= 1
        idx = stack[top]
        r = idx // W
        c = idx % W
        size += 1
        for k in range(8):
            if not eight and k % 2 == 1:
                continue  # odd indices are the diagonal directions
            nr = r + _NBR_R[k]
            nc = c + _NBR_C[k]
            if nr < 0 or nr >= H or nc < 0 or nc >= W:
                continue
            if cells[nr, nc] == want and labels[nr, nc] == 0:
                labels[nr, nc] = label
                stack[top] = nr * W + nc
                top += 1
    return size


@njit(cache=True)
def _trace_border(mask, sr, sc, back):
    """Chain-code length of one Moore-traced border.

    `back` is the neighbor index pointing from the start pixel toward the
    background pixel the scan begins after. Terminates per Jacob's
    criterion (re-entering the start pixel with the same first move).
    Returns 0.0 for a pixel with no 8-neighbors in the mask.
    """
    H, W = mask.shape
    length = 0.0
    r, c, d = sr, sc, back
    first_move = -1
    steps = 0
    limit = 8 * H * W + 8
    while True:
        found = -1
        for k in range(1, 9):
            nd = (d + k) % 8
            nr = r + _NBR_R[nd]
            nc = c + _NBR_C[nd]
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
        r += _NBR_R[found]
        c += _NBR_C[found]
        d = (found + 4) % 8  # resume scan after the pixel we came from
        steps += 1
        if steps > limit:
            return length  # unreachable guard against tracer runaway
    return length


@njit(cache=True)
def perimeter_total(mask):
    """Total chain-code perimeter over all components and their holes."""
    H, W = mask.shape
    if H == 0 or W == 0:
        return 0.0
    HP = H + 2
    WP = W + 2
    padded = np.zeros((HP, WP), np.bool_)
    padded[1 : H + 1, 1 : W + 1] = mask

    total = 0.0
    labels = np.zeros((HP, WP), np.int32)
    stack = np.empty(HP * WP, np.int64)

    # Outer contour of each 8-connected component, traced from its
    # raster-first pixel (everything above/left of it is background).
    next_label = 0
    for i in range(1, H + 1):
        for j in range(1, W + 1):
            if padded[i, j] and labels[i, j] == 0:
                next_label += 1
                size = _flood(padded, labels, i, j, next_label, True, True, stack)
                if size == 1:
                    total += 4.0  # crack convention for isolated pixels
                else:
                    total += _trace_border(padded, i, j, 4)  # backtrack West

    # Each 4-connected background region not touching the pad ring is a
    # hole; its border is traced on the mask pixel just above the hole's
    # raster-first pixel (always a mask pixel by 4-connectivity).
    bg_labels = np.zeros((HP, WP), np.int32)
    next_bg = 0
    for i in range(HP):
        for j in range(WP):
            if not padded[i, j] and bg_labels[i, j] == 0:
                next_bg += 1
                _flood(padded, bg_labels, i, j, next_bg, False, False, stack)
                if next_bg == 1:
                    continue  # scan starts on the pad ring: the outside
                total += _trace_border(padded, i - 1, j, 2)  # backtrack South
    return total
