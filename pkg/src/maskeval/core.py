"""Core label-map and mask types.

Array conventions used throughout the package:

* rasters are 2D numpy arrays of shape ``(height, width)``, row-major;
* ``BinaryMask`` / ``EdgeMap`` are ``bool`` arrays;
* ``ProbMap`` is a ``float32`` array with values in [0, 1] (the on-disk
  PFM precision); ``DistanceField``, ``ScalarField`` and ``WeightMap``
  are ``float64`` arrays;
* label rasters are ``uint8``: class ids are small unsigned integers and
  255 is reserved as the ignore id by default.

``LabelMap`` and ``ProbStack`` instances are immutable after
construction (their arrays are marked read-only), so they are safe to
share across worker processes without copying or locking.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
import numpy.typing as npt

BinaryMask = npt.NDArray[np.bool_]
EdgeMap = npt.NDArray[np.bool_]
ProbMap = npt.NDArray[np.float32]
DistanceField = npt.NDArray[np.float64]
ScalarField = npt.NDArray[np.float64]
WeightMap = npt.NDArray[np.float64]

CANONICAL_CLASS_NAMES = (
    "others",
    "human",
    "building",
    "vegetation",
    "ground",
    "sky",
    "water",
)
DEFAULT_IGNORE_ID = 255
EXTENSION_ID_START = 7  # first id available to extension classes


class ValidationError(ValueError):
    """Raised when data violates a documented content contract."""


def require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


@dataclass(frozen=True)
class ClassTable:
    """Ordered id-to-name table plus the reserved ignore id.

    Ids must be unique, fit in a uint8 raster, and differ from
    ``ignore_id``. The canonical seven-class table fixes ids 0..6 as
    others, human, building, vegetation, ground, sky, water; extension
    classes take the next free id >= 7.
    """

    entries: tuple[tuple[int, str], ...]
    ignore_id: int = DEFAULT_IGNORE_ID

    def __post_init__(self) -> None:
        require(len(self.entries) > 0, "class table must not be empty")
        require(0 <= self.ignore_id <= 255, "ignore id must fit in uint8")
        seen: set[int] = set()
        for cid, name in self.entries:
            require(0 <= cid <= 255, f"class id {cid} does not fit in uint8")
            require(cid != self.ignore_id, f"class id {cid} collides with ignore id")
            require(cid not in seen, f"duplicate class id {cid}")
            require(bool(name), f"class id {cid} has an empty name")
            seen.add(cid)

    @classmethod
    def canonical(cls) -> "ClassTable":
        return cls(tuple(enumerate(CANONICAL_CLASS_NAMES)))

    def ids(self) -> tuple[int, ...]:
        return tuple(cid for cid, _ in self.entries)

    def name_of(self, cid: int) -> str:
        for i, name in self.entries:
            if i == cid:
                return name
        raise ValidationError(f"unknown class id {cid}")

    def __contains__(self, cid: int) -> bool:
        return any(i == cid for i, _ in self.entries)

    def next_free_id(self) -> int:
        used = set(self.ids())
        cid = EXTENSION_ID_START
        while cid in used or cid == self.ignore_id:
            cid += 1
        require(cid <= 255, "no free class id left")
        return cid

    def with_new_class(self, name: str, cid: int | None = None) -> "ClassTable":
        """Extended copy with one new class (next free id >= 7 by default)."""
        if cid is None:
            cid = self.next_free_id()
        require(cid not in self, f"class id {cid} already present")
        require(cid >= EXTENSION_ID_START, f"extension class id {cid} must be >= {EXTENSION_ID_START}")
        return ClassTable(self.entries + ((cid, name),), self.ignore_id)

    def to_json_dict(self) -> dict:
        return {
            "classes": [{"id": cid, "name": name} for cid, name in self.entries],
            "ignore": self.ignore_id,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ClassTable":
        try:
            entries = tuple((int(c["id"]), str(c["name"])) for c in obj["classes"])
            ignore = int(obj.get("ignore", DEFAULT_IGNORE_ID))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed class table: {exc}") from exc
        return cls(entries, ignore)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr:
        out = arr.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class LabelMap:
    """A (height, width) uint8 raster of class ids plus its class table.

    Every pixel is either a table id or the ignore id; construction
    validates this, so a LabelMap can never carry an unknown id.
    """

    data: np.ndarray
    table: ClassTable

    def __post_init__(self) -> None:
        require(isinstance(self.data, np.ndarray) and self.data.ndim == 2,
                "label raster must be a 2D array")
        require(self.data.dtype == np.uint8, "label raster must be uint8")
        require(self.data.shape[0] >= 1 and self.data.shape[1] >= 1,
                "label raster must contain at least one pixel")
        counts = np.bincount(self.data.ravel(), minlength=256)
        allowed = np.zeros(256, dtype=bool)
        for cid in self.table.ids():
            allowed[cid] = True
        allowed[self.table.ignore_id] = True
        bad = np.nonzero((counts > 0) & ~allowed)[0]
        if bad.size:
            raise ValidationError(f"unknown class id {int(bad[0])}")
        object.__setattr__(self, "data", _freeze(self.data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def class_counts(self) -> dict[int, int]:
        """Pixel count per table id (ignore excluded), zeros included."""
        counts = np.bincount(self.data.ravel(), minlength=256)
        return {cid: int(counts[cid]) for cid in self.table.ids()}

    def present_ids(self) -> tuple[int, ...]:
        counts = self.class_counts()
        return tuple(cid for cid, n in counts.items() if n > 0)

    def ignore_mask(self) -> BinaryMask:
        return self.data == self.table.ignore_id


def class_mask(label_map: LabelMap, cid: int) -> BinaryMask:
    """Boolean raster of pixels labeled `cid`; ignore pixels are never set."""
    require(cid in label_map.table, f"unknown class id {cid}")
    return label_map.data == np.uint8(cid)


@dataclass(frozen=True)
class ProbStack:
    """Per-class probability maps, one per non-ignore table id.

    ``maps`` has shape (n_classes, height, width), float32 in [0, 1],
    ordered like ``table.entries``.
    """

    maps: np.ndarray
    table: ClassTable

    def __post_init__(self) -> None:
        require(isinstance(self.maps, np.ndarray) and self.maps.ndim == 3,
                "probability stack must be a 3D array")
        require(self.maps.dtype == np.float32, "probability stack must be float32")
        require(self.maps.shape[0] == len(self.table.entries),
                "probability stack must hold one map per table class")
        require(self.maps.shape[1] >= 1 and self.maps.shape[2] >= 1,
                "probability maps must contain at least one pixel")
        validate_probabilities(self.maps, "probability stack")
        object.__setattr__(self, "maps", _freeze(self.maps))

    @property
    def height(self) -> int:
        return self.maps.shape[1]

    @property
    def width(self) -> int:
        return self.maps.shape[2]

    def class_ids(self) -> tuple[int, ...]:
        return self.table.ids()

    def map_for(self, cid: int) -> ProbMap:
        for i, (tid, _) in enumerate(self.table.entries):
            if tid == cid:
                return self.maps[i]
        raise ValidationError(f"unknown class id {cid}")


def validate_probabilities(values: np.ndarray, what: str) -> None:
    """Reject (never clamp) non-finite or out-of-range probability values."""
    if not np.isfinite(values).all():
        raise ValidationError(f"{what} contains non-finite values")
    lo = float(values.min())
    hi = float(values.max())
    if lo < 0.0 or hi > 1.0:
        raise ValidationError(
            f"{what} contains values outside [0, 1] (min {lo}, max {hi})"
        )


def as_binary_mask(arr: npt.ArrayLike) -> BinaryMask:
    """Coerce an array-like to a 2D boolean mask."""
    mask = np.asarray(arr)
    require(mask.ndim == 2, "mask must be a 2D array")
    return mask.astype(bool, copy=False)


def require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-2:] != b.shape[-2:]:
        raise ValidationError(f"dimension mismatch: {a.shape[-2:]} vs {b.shape[-2:]}")
