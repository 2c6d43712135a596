"""Foundational geometric types: points, boxes, masks, and the IoU kernel.

Boxes use continuous (sub-pixel) coordinates in (left, top, width, height)
form, matching the MOTChallenge file convention. Rasterization to integer
pixels happens only in mask operations, via pixel-center containment: pixel
(i, j) has its center at (i + 0.5, j + 0.5). The x-axis points right and the
y-axis points down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRegion


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box as (left, top, width, height) in pixels."""

    left: float
    top: float
    width: float
    height: float

    def __post_init__(self):
        vals = (self.left, self.top, self.width, self.height)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite box {vals}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"non-positive box size {self.width}x{self.height}")

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    def corners(self) -> list[Point2]:
        return [
            Point2(self.left, self.top),
            Point2(self.right, self.top),
            Point2(self.right, self.bottom),
            Point2(self.left, self.bottom),
        ]


@dataclass(frozen=True)
class Detection:
    bbox: BBox
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class Mask:
    """Binary raster; ``bits`` is a (height, width) boolean array."""

    width: int
    height: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != (self.height, self.width):
            raise ValueError(
                f"bits shape {bits.shape} != ({self.height}, {self.width})"
            )
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_array(cls, arr) -> "Mask":
        arr = np.asarray(arr, dtype=bool)
        return cls(width=arr.shape[1], height=arr.shape[0], bits=arr)

    @classmethod
    def zeros(cls, width: int, height: int) -> "Mask":
        return cls(width=width, height=height, bits=np.zeros((height, width), bool))

    def count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, Mask):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and bool(np.array_equal(self.bits, other.bits))
        )


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, over continuous area."""
    iw = min(a.right, b.right) - max(a.left, b.left)
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return min(1.0, inter / (a.area + b.area - inter))


def iou_matrix(rows: list[BBox], cols: list[BBox]) -> np.ndarray:
    """Pairwise IoU, vectorized; shape (len(rows), len(cols))."""
    if not rows or not cols:
        return np.zeros((len(rows), len(cols)))
    ra = np.array([[b.left, b.top, b.right, b.bottom] for b in rows])
    ca = np.array([[b.left, b.top, b.right, b.bottom] for b in cols])
    lt = np.maximum(ra[:, None, :2], ca[None, :, :2])
    rb = np.minimum(ra[:, None, 2:], ca[None, :, 2:])
    wh = np.clip(rb - lt, 0.0, None)
    inter = wh[..., 0] * wh[..., 1]
    area_r = (ra[:, 2] - ra[:, 0]) * (ra[:, 3] - ra[:, 1])
    area_c = (ca[:, 2] - ca[:, 0]) * (ca[:, 3] - ca[:, 1])
    union = area_r[:, None] + area_c[None, :] - inter
    return np.minimum(1.0, inter / union)


def bbox_to_state_vec(b: BBox) -> tuple[float, float, float, float]:
    """Box as (center x, center y, aspect = w/h, height)."""
    return (b.left + b.width / 2.0, b.top + b.height / 2.0,
            b.width / b.height, b.height)


def state_vec_to_bbox(v) -> BBox:
    """Inverse of :func:`bbox_to_state_vec`.

    Size components are clamped to a small positive floor so that
    extrapolated filter states (which can drift non-physical) still map to a
    valid box.
    """
    cx, cy, aspect, height = v
    height = max(float(height), 1e-3)
    width = max(float(aspect) * height, 1e-3)
    return BBox(cx - width / 2.0, cy - height / 2.0, width, height)


def pixel_span(lo: float, hi: float, n: int) -> tuple[int, int]:
    """Integer index range [first, last] whose pixel centers lie in [lo, hi),
    clamped to [0, n). Returns (0, -1) when empty.
    """
    first = max(0, math.ceil(lo - 0.5))
    last = min(n - 1, math.ceil(hi - 0.5) - 1)
    return first, last


def mask_and_bbox(m: Mask, b: BBox) -> Mask:
    """Pixel-wise AND of a mask with a box's raster footprint.

    The box is clamped to image bounds; a pixel survives iff its input bit is
    set and its center lies inside the clamped box.
    """
    x0, x1 = pixel_span(b.left, b.right, m.width)
    y0, y1 = pixel_span(b.top, b.bottom, m.height)
    if x0 > x1 or y0 > y1:
        raise DegenerateRegion(
            f"box ({b.left}, {b.top}, {b.width}, {b.height}) covers no pixels "
            f"of a {m.width}x{m.height} image"
        )
    out = np.zeros_like(m.bits)
    out[y0:y1 + 1, x0:x1 + 1] = m.bits[y0:y1 + 1, x0:x1 + 1]
    return Mask(m.width, m.height, out)
