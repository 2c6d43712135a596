"""Cross-modality cooperation: pseudo-label export, score-max fusion,
brightness classification, and tracker switching.

Fusion and switching both consume two trackers with independent ID spaces,
so records are matched per frame by IoU and the discovered ID pairs are
remembered in a persistent table. Output IDs come from that table's stable
fused-ID space, which is what lets an identity survive a bright/dark
transition.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .assignment import assign
from .calibration import Homography, warp_bbox
from .errors import PointAtInfinity
from .geometry import BBox, iou_matrix
from .tracker import TrackRecord


class BrightnessLabel(Enum):
    BRIGHT = "B"
    DARK = "D"


@dataclass(frozen=True)
class FrameStats:
    frame_id: int
    mean_intensity: float

    def __post_init__(self):
        if not (0.0 <= self.mean_intensity <= 255.0):
            raise ValueError(f"mean intensity {self.mean_intensity} out of range")


@dataclass(frozen=True)
class PseudoLabelSet:
    records: list[TrackRecord]
    dropped: int


def export_pseudo_labels(
    teacher: list[TrackRecord],
    h: Homography,
    student_bounds: tuple[float, float],
    min_score: float = 0.0,
) -> PseudoLabelSet:
    """Warp teacher records into the student camera frame.

    Records below ``min_score`` are skipped; boxes are clamped to the student
    image and dropped (counted) when the clamped area falls under 1 px^2.
    IDs and scores are carried through unchanged.
    """
    width, height = student_bounds
    out: list[TrackRecord] = []
    dropped = 0
    for rec in teacher:
        if rec.score < min_score:
            continue
        try:
            warped = warp_bbox(h, rec.bbox)
        except PointAtInfinity:
            dropped += 1
            continue
        left = max(warped.left, 0.0)
        top = max(warped.top, 0.0)
        right = min(warped.right, width)
        bottom = min(warped.bottom, height)
        if (right - left) * (bottom - top) < 1.0:
            dropped += 1
            continue
        out.append(
            TrackRecord(rec.frame_id, rec.person_id,
                        BBox(left, top, right - left, bottom - top), rec.score)
        )
    return PseudoLabelSet(records=out, dropped=dropped)


class IdPairTable:
    """Persistent mapping from two trackers' ID spaces into one fused space."""

    def __init__(self):
        self._a: dict[int, int] = {}
        self._b: dict[int, int] = {}
        self._next = 1

    def _fresh(self) -> int:
        fid = self._next
        self._next += 1
        return fid

    def pair(self, a_id: int, b_id: int) -> int:
        """Register (or recall) a matched ID pair; returns the fused ID."""
        fa = self._a.get(a_id)
        fb = self._b.get(b_id)
        if fa is not None:
            self._b.setdefault(b_id, fa)
            return fa
        if fb is not None:
            self._a[a_id] = fb
            return fb
        fid = self._fresh()
        self._a[a_id] = fid
        self._b[b_id] = fid
        return fid

    def single_a(self, a_id: int) -> int:
        if a_id not in self._a:
            self._a[a_id] = self._fresh()
        return self._a[a_id]

    def single_b(self, b_id: int) -> int:
        if b_id not in self._b:
            self._b[b_id] = self._fresh()
        return self._b[b_id]


def _match_records(
    a: list[TrackRecord], b: list[TrackRecord], iou_gate: float
):
    cost = 1.0 - iou_matrix([r.bbox for r in a], [r.bbox for r in b])
    return assign(cost, iou_gate)


def fuse_frame(
    a: list[TrackRecord],
    b: list[TrackRecord],
    id_map: IdPairTable,
    iou_gate: float = 0.5,
) -> list[TrackRecord]:
    """Merge two trackers' records for one frame by higher confidence.

    Matched pairs emit the record with the strictly higher score; on a tie
    the ``b`` record wins. Unmatched records pass through. All output IDs are
    fused IDs from ``id_map``.
    """
    matches, ua, ub = _match_records(a, b, iou_gate)
    out: list[TrackRecord] = []
    for ia, ib in matches:
        ra, rb = a[ia], b[ib]
        fid = id_map.pair(ra.person_id, rb.person_id)
        chosen = ra if ra.score > rb.score else rb
        out.append(TrackRecord(chosen.frame_id, fid, chosen.bbox, chosen.score))
    for ia in ua:
        r = a[ia]
        out.append(TrackRecord(r.frame_id, id_map.single_a(r.person_id),
                               r.bbox, r.score))
    for ib in ub:
        r = b[ib]
        out.append(TrackRecord(r.frame_id, id_map.single_b(r.person_id),
                               r.bbox, r.score))
    out.sort(key=lambda r: r.person_id)
    return out


def classify_brightness(
    s: FrameStats,
    threshold: float = 60.0,
    hysteresis: float = 5.0,
    prev: BrightnessLabel | None = None,
) -> BrightnessLabel:
    """Threshold the frame's mean intensity with a hysteresis band.

    Inside the band the previous label holds; without a previous label the
    plain threshold decides.
    """
    if prev is None:
        return (
            BrightnessLabel.BRIGHT
            if s.mean_intensity > threshold
            else BrightnessLabel.DARK
        )
    up = threshold + (hysteresis if prev is BrightnessLabel.DARK else 0.0)
    down = threshold - (hysteresis if prev is BrightnessLabel.BRIGHT else 0.0)
    if s.mean_intensity > up:
        return BrightnessLabel.BRIGHT
    if s.mean_intensity < down:
        return BrightnessLabel.DARK
    return prev


def switch_frame(
    rgb: list[TrackRecord],
    t: list[TrackRecord],
    label: BrightnessLabel,
    id_map: IdPairTable,
    iou_gate: float = 0.5,
) -> list[TrackRecord]:
    """Emit the RGB records when bright, the thermal records when dark.

    Both streams are matched every frame to keep the ID-pair table current,
    so the fused identity of a person carries across a bright/dark switch as
    long as the two trackers' boxes overlap near the transition.
    """
    matches, _, _ = _match_records(rgb, t, iou_gate)
    for ia, ib in matches:
        id_map.pair(rgb[ia].person_id, t[ib].person_id)
    if label is BrightnessLabel.BRIGHT:
        chosen, lookup = rgb, id_map.single_a
    else:
        chosen, lookup = t, id_map.single_b
    out = [
        TrackRecord(r.frame_id, lookup(r.person_id), r.bbox, r.score)
        for r in chosen
    ]
    out.sort(key=lambda r: r.person_id)
    return out
