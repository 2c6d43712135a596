"""Occlusion-boundary landmark extraction.

For each tracked person, the visible-region raster is restricted to the
person's box and the lowest set pixel of every column is taken. Columns
whose lowest pixel sits on the box's bottom edge belong to unoccluded feet
rather than an occlusion boundary and are filtered out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DegenerateRegion, MissingMask
from .geometry import BBox, Mask, Point2, mask_and_bbox, pixel_span
from .tracker import TrackRecord


@dataclass(frozen=True)
class HO3Landmark:
    frame_id: int
    person_id: int
    point: Point2


@dataclass(frozen=True)
class LandmarkMap:
    """Per-frame landmark lists, keyed by strictly increasing frame IDs."""

    frames: dict[int, list[HO3Landmark]] = field(default_factory=dict)

    def __post_init__(self):
        keys = list(self.frames)
        if keys != sorted(keys):
            object.__setattr__(
                self, "frames", {k: self.frames[k] for k in sorted(keys)}
            )

    def frame_ids(self) -> list[int]:
        return list(self.frames)

    def landmarks(self, frame_id: int) -> list[HO3Landmark]:
        return self.frames.get(frame_id, [])


def extract_lower_endpoints(region: Mask, b: BBox) -> list[Point2]:
    """Lowest set pixel per column within the box's clamped column span.

    ``region`` should already be restricted to one person (via
    ``mask_and_bbox``). Columns with no set bits emit nothing; output is
    ordered by x ascending.
    """
    x0, x1 = pixel_span(b.left, b.right, region.width)
    if x0 > x1:
        return []
    cols = region.bits[:, x0:x1 + 1]
    any_set = cols.any(axis=0)
    # Lowest set row per column = height-1 - argmax over the flipped column.
    lowest = region.height - 1 - np.argmax(cols[::-1, :], axis=0)
    return [
        Point2(float(x0 + i), float(lowest[i]))
        for i in range(cols.shape[1])
        if any_set[i]
    ]


def filter_landmarks(
    points: list[Point2],
    b: BBox,
    margin: float = 2.0,
    unoccluded_ratio: float = 0.8,
) -> list[Point2]:
    """Drop lower endpoints that sit on the box's bottom edge.

    Points within ``margin`` pixel rows of the bottom edge are unoccluded
    feet, not occlusion boundaries. If more than ``unoccluded_ratio`` of the
    points are dropped the person counts as unoccluded and contributes no
    landmarks at all.
    """
    if not points:
        return []
    bottom_row = np.ceil(b.bottom - 0.5) - 1
    kept = [p for p in points if bottom_row - p.y >= margin]
    removed = len(points) - len(kept)
    if removed / len(points) > unoccluded_ratio:
        return []
    return kept


def build_landmark_map(
    masks: Mapping[int, Mask],
    tracks: list[TrackRecord],
    margin: float = 2.0,
    unoccluded_ratio: float = 0.8,
) -> LandmarkMap:
    """Extract filtered landmarks for every track record, grouped by frame."""
    by_frame: dict[int, list[TrackRecord]] = {}
    for rec in tracks:
        by_frame.setdefault(rec.frame_id, []).append(rec)

    frame_ids = sorted(set(masks) | set(by_frame))
    frames: dict[int, list[HO3Landmark]] = {}
    for fid in frame_ids:
        landmarks: list[HO3Landmark] = []
        for rec in sorted(by_frame.get(fid, []), key=lambda r: r.person_id):
            if fid not in masks:
                raise MissingMask(f"frame {fid} has tracks but no mask")
            try:
                region = mask_and_bbox(masks[fid], rec.bbox)
            except DegenerateRegion:
                continue
            points = extract_lower_endpoints(region, rec.bbox)
            for p in filter_landmarks(points, rec.bbox, margin, unoccluded_ratio):
                landmarks.append(HO3Landmark(fid, rec.person_id, p))
        frames[fid] = landmarks
    return LandmarkMap(frames)
