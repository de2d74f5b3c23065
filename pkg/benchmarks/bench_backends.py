#!/usr/bin/env python3
"""Side-by-side timing of the numba and numpy kernel backends.

Runs the three geometry kernels both backends implement (full squared
EDT, radius-capped squared distance, chain-code perimeter) on blocky
synthetic masks and prints best-of-N wall times plus the speed ratio.
Results are cross-checked for agreement before timing, so a mismatch
aborts the run instead of producing numbers for broken kernels.

Usage:
    python benchmarks/bench_backends.py
    python benchmarks/bench_backends.py --sizes 512 2048 --repeats 5
"""

from __future__ import annotations

import argparse
import time
from typing import Callable

import numpy as np

from maskeval.backends import get_backend


def blocky_mask(size: int, cell: int, seed: int) -> np.ndarray:
    """Random mask made of cell x cell blocks, like a coarse label map."""
    rng = np.random.default_rng(seed)
    coarse = rng.random((size // cell, size // cell)) < 0.5
    return np.kron(coarse, np.ones((cell, cell), dtype=bool))


def best_of(fn: Callable[[], object], repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def check_agreement(nb, npb, mask: np.ndarray, cap: int) -> None:
    full_a = nb.squared_edt(mask)
    full_b = npb.squared_edt(mask)
    assert np.array_equal(full_a, full_b), "squared_edt disagrees"

    capped_a = nb.sqdist_capped(mask, cap)
    capped_b = npb.sqdist_capped(mask, cap)
    near = full_a <= cap * cap
    assert np.array_equal(capped_a[near], full_a[near]), "numba capped wrong"
    assert np.array_equal(capped_b[near], full_a[near]), "numpy capped wrong"

    per_a = nb.perimeter_total(mask)
    per_b = npb.perimeter_total(mask)
    assert abs(per_a - per_b) <= 1e-9 * max(1.0, abs(per_a)), "perimeter disagrees"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[512, 1024, 2048],
                        help="square frame sizes to benchmark")
    parser.add_argument("--cell", type=int, default=32,
                        help="block size of the synthetic masks")
    parser.add_argument("--cap", type=int, default=6,
                        help="radius for the capped transform")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repeats per kernel (best is reported)")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)

    nb = get_backend("numba")
    npb = get_backend("numpy")

    # compile the numba kernels outside the timed region
    warm = blocky_mask(64, 8, args.seed)
    nb.squared_edt(warm)
    nb.sqdist_capped(warm, args.cap)
    nb.perimeter_total(warm)
    check_agreement(nb, npb, warm, args.cap)

    print(f"{'kernel':<22} {'size':>6} {'numba':>10} {'numpy':>10} {'numpy/numba':>12}")
    for size in args.sizes:
        mask = blocky_mask(size, args.cell, args.seed)
        kernels = [
            ("squared_edt", lambda b, m=mask: b.squared_edt(m)),
            ("sqdist_capped", lambda b, m=mask: b.sqdist_capped(m, args.cap)),
            ("perimeter_total", lambda b, m=mask: b.perimeter_total(m)),
        ]
        for name, call in kernels:
            t_nb = best_of(lambda c=call: c(nb), args.repeats)
            t_np = best_of(lambda c=call: c(npb), args.repeats)
            ratio = t_np / t_nb if t_nb > 0 else float("inf")
            print(f"{name:<22} {size:>6} {t_nb:>9.4f}s {t_np:>9.4f}s {ratio:>11.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
