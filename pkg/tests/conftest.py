"""Shared fixtures and small raster builders."""

from __future__ import annotations

import numpy as np
import pytest

from maskeval import ClassTable, LabelMap


def mask_from_strings(rows: list[str]) -> np.ndarray:
    """Build a bool mask from strings of '.' (off) and 'X' (on)."""
    return np.array([[ch == "X" for ch in row] for row in rows], dtype=bool)


def random_mask(rng: np.random.Generator, shape: tuple[int, int], density: float = 0.5) -> np.ndarray:
    return rng.random(shape) < density


def random_label_data(
    rng: np.random.Generator,
    shape: tuple[int, int],
    n_classes: int = 7,
    ignore_fraction: float = 0.0,
) -> np.ndarray:
    data = rng.integers(0, n_classes, size=shape).astype(np.uint8)
    if ignore_fraction > 0.0:
        data[rng.random(shape) < ignore_fraction] = 255
    return data


def blocky_label_data(
    rng: np.random.Generator, shape: tuple[int, int], n_classes: int = 7, cell: int = 8
) -> np.ndarray:
    """Label maps with contiguous regions, nearer real masks than noise."""
    hc = (shape[0] + cell - 1) // cell
    wc = (shape[1] + cell - 1) // cell
    coarse = rng.integers(0, n_classes, size=(hc, wc)).astype(np.uint8)
    return np.repeat(np.repeat(coarse, cell, axis=0), cell, axis=1)[: shape[0], : shape[1]]


@pytest.fixture
def table() -> ClassTable:
    return ClassTable.canonical()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def label_map(data: np.ndarray, table: ClassTable) -> LabelMap:
    return LabelMap(np.ascontiguousarray(data, dtype=np.uint8), table)
