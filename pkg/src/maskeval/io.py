"""File interchange: PNG label maps, PFM probability maps, JSON class tables.

Formats
-------
* Label maps: PNG, 8-bit, single channel (``L``) or indexed palette
  (``P``); the pixel value or palette *index* is the class id, 255 is
  ignore. Saved maps are always single-channel PNG.
* Probability maps: grayscale PFM, magic ``Pf``. The scale line's sign
  selects byte order (negative = little-endian, the form we write); its
  magnitude is ignored. Rows are stored in raster order: the first data
  row is image row 0 (no bottom-up flip on either side). One file per
  class, named ``<stem>.<class_id>.pfm``.
* Class tables: JSON ``{"classes": [{"id": 0, "name": "others"}, ...],
  "ignore": 255}``.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .core import (
    ClassTable,
    LabelMap,
    ProbMap,
    ProbStack,
    ValidationError,
    validate_probabilities,
)

_LABEL_MODES = ("L", "P")
_PFM_SUFFIX = re.compile(r"^(?P<stem>.+)\.(?P<cid>\d+)\.pfm$")


def load_class_table(path: str | Path) -> ClassTable:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid class table JSON: {exc}") from exc
    return ClassTable.from_json_dict(obj)


def save_class_table(table: ClassTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(table.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_label_map(path: str | Path, table: ClassTable) -> LabelMap:
    """Load and validate an 8-bit single-channel or palette PNG label map."""
    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode not in _LABEL_MODES:
                raise ValidationError(
                    f"{path}: label maps must be 8-bit single-channel or "
                    f"palette PNG, got mode {mode!r}"
                )
            data = np.asarray(im, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise OSError(f"{path}: unreadable image: {exc}") from exc
    try:
        return LabelMap(data, table)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def save_label_map(label_map: LabelMap, path: str | Path) -> None:
    """Write an 8-bit single-channel PNG whose pixel values are class ids."""
    Image.fromarray(np.asarray(label_map.data), mode="L").save(path, format="PNG")


def read_pfm(path: str | Path) -> np.ndarray:
    """Read a grayscale PFM file as a float32 (height, width) array."""
    with open(path, "rb") as fh:
        magic = _read_token(fh, path)
        if magic == b"PF":
            raise ValidationError(f"{path}: color PFM not supported; expected grayscale 'Pf'")
        if magic != b"Pf":
            raise ValidationError(f"{path}: not a PFM file (magic {magic!r})")
        try:
            width = int(_read_token(fh, path))
            height = int(_read_token(fh, path))
            scale = float(_read_token(fh, path))
        except ValueError as exc:
            raise ValidationError(f"{path}: malformed PFM header: {exc}") from exc
        if width < 1 or height < 1:
            raise ValidationError(f"{path}: bad PFM dimensions {width}x{height}")
        if scale == 0.0:
            raise ValidationError(f"{path}: PFM scale must be non-zero")
        dtype = "<f4" if scale < 0 else ">f4"
        payload = fh.read(4 * width * height)
        if len(payload) != 4 * width * height:
            raise ValidationError(f"{path}: truncated PFM payload")
        values = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return values.astype(np.float32, copy=False)


def write_pfm(values: np.ndarray, path: str | Path) -> None:
    """Write a float32 grayscale PFM (little-endian, rows in raster order)."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValidationError("PFM payload must be a 2D array")
    if not np.isfinite(arr).all():
        raise ValidationError("PFM payload must be finite")
    arr32 = np.ascontiguousarray(arr, dtype="<f4")
    height, width = arr32.shape
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{width} {height}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(arr32.tobytes())


def load_prob_map(path: str | Path) -> ProbMap:
    """Read a PFM probability map, rejecting values outside [0, 1]."""
    values = read_pfm(path)
    try:
        validate_probabilities(values, "probability map")
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return values


def find_prob_stems(directory: str | Path) -> list[str]:
    """Distinct `<stem>` values among `<stem>.<class_id>.pfm` files, sorted."""
    stems = set()
    for p in Path(directory).iterdir():
        m = _PFM_SUFFIX.match(p.name)
        if m:
            stems.add(m.group("stem"))
    return sorted(stems)


def load_prob_stack(
    directory: str | Path, table: ClassTable, stem: str | None = None
) -> ProbStack:
    """Load one per-class PFM stack ``<stem>.<class_id>.pfm`` from a directory.

    With ``stem=None`` the directory must contain exactly one stack.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory}: not a directory")
    if stem is None:
        stems = find_prob_stems(directory)
        if not stems:
            raise ValidationError(f"{directory}: no '<stem>.<class_id>.pfm' files found")
        if len(stems) > 1:
            raise ValidationError(
                f"{directory}: multiple stacks found ({', '.join(stems[:5])}...); "
                "pass an explicit stem"
            )
        stem = stems[0]

    maps = []
    shape: tuple[int, int] | None = None
    for cid, _name in table.entries:
        path = directory / f"{stem}.{cid}.pfm"
        if not path.exists():
            raise ValidationError(f"{directory}: missing probability map for class id {cid} ({path.name})")
        values = load_prob_map(path)
        if shape is None:
            shape = values.shape
        elif values.shape != shape:
            raise ValidationError(
                f"{path.name}: dimension mismatch {values.shape} vs {shape}"
            )
        maps.append(values)
    return ProbStack(np.stack(maps, axis=0), table)


def load_mask_png(path: str | Path) -> np.ndarray:
    """Read an 8-bit PNG as a boolean mask: nonzero pixels are True."""
    try:
        with Image.open(path) as im:
            if im.mode not in _LABEL_MODES:
                raise ValidationError(
                    f"{path}: masks must be 8-bit single-channel or palette PNG, got mode {im.mode!r}"
                )
            return np.asarray(im, dtype=np.uint8) != 0
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise OSError(f"{path}: unreadable image: {exc}") from exc


def save_mask_png(mask: np.ndarray, path: str | Path) -> None:
    """Write a boolean mask as an 8-bit PNG with True = 255."""
    if mask.dtype != np.bool_ or mask.ndim != 2:
        raise ValidationError("mask must be a 2D bool array")
    Image.fromarray(mask.astype(np.uint8) * np.uint8(255), mode="L").save(path, format="PNG")


def load_rgb_png(path: str | Path) -> np.ndarray:
    """Read an RGB PNG as a (height, width, 3) uint8 array."""
    try:
        with Image.open(path) as im:
            if im.mode != "RGB":
                raise ValidationError(f"{path}: expected an RGB image, got mode {im.mode!r}")
            return np.asarray(im, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise OSError(f"{path}: unreadable image: {exc}") from exc


def save_rgb_png(image: np.ndarray, path: str | Path) -> None:
    """Write a (height, width, 3) uint8 array as an RGB PNG."""
    if image.dtype != np.uint8 or image.ndim != 3 or image.shape[2] != 3:
        raise ValidationError("image must be a (height, width, 3) uint8 array")
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


def _read_token(fh, path) -> bytes:
    """Read one whitespace-delimited header token from a binary stream."""
    token = b""
    while True:
        ch = fh.read(1)
        if not ch:
            if token:
                return token
            raise ValidationError(f"{path}: truncated PFM header")
        if ch.isspace():
            if token:
                return token
            continue
        token += ch
