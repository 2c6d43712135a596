"""Two-stage tracking-by-detection engine.

Detections are split by confidence: high-score detections associate first
against all live tracks, then low-score detections get a second chance
against tracks that were active going into the frame. Tracks that miss too
many frames are removed; unmatched high-score detections spawn new tracks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import kalman
from .assignment import assign
from .geometry import BBox, Detection, iou_matrix


class TrackStatus(Enum):
    TENTATIVE = "tentative"
    ACTIVE = "active"
    LOST = "lost"
    REMOVED = "removed"


@dataclass(frozen=True)
class TrackRecord:
    """One tracker output row: (frame, person ID, box, confidence)."""

    frame_id: int
    person_id: int
    bbox: BBox
    score: float


@dataclass(frozen=True)
class TrackerParams:
    high_score_thresh: float = 0.6
    low_score_thresh: float = 0.1
    iou_match_thresh_stage1: float = 0.2
    iou_match_thresh_stage2: float = 0.5
    new_track_score_thresh: float = 0.7
    max_lost_frames: int = 30
    min_hits_to_activate: int = 1

    def __post_init__(self):
        if not (0.0 <= self.low_score_thresh < self.high_score_thresh <= 1.0):
            raise ValueError("need 0 <= low_score_thresh < high_score_thresh <= 1")


@dataclass
class Track:
    id: int
    state: kalman.KalmanState
    status: TrackStatus
    frames_since_update: int = 0
    hits: int = 1
    last_score: float = 0.0


class ByteTracker:
    """Stateful per-sequence tracker; feed frames in increasing order."""

    def __init__(self, params: TrackerParams | None = None):
        self.params = params or TrackerParams()
        self.tracks: list[Track] = []
        self._next_id = 1
        self._last_frame = 0

    def _new_track(self, det: Detection) -> Track:
        p = self.params
        status = (
            TrackStatus.ACTIVE
            if p.min_hits_to_activate <= 1
            else TrackStatus.TENTATIVE
        )
        track = Track(
            id=self._next_id,
            state=kalman.initiate(det.bbox),
            status=status,
            last_score=det.score,
        )
        self._next_id += 1
        return track

    def step(self, dets: list[Detection], frame_id: int) -> list[TrackRecord]:
        """Associate one frame of detections; returns records of active tracks."""
        if frame_id <= self._last_frame:
            raise ValueError(f"frame_id {frame_id} not increasing")
        self._last_frame = frame_id
        p = self.params

        high = [d for d in dets if d.score >= p.high_score_thresh]
        low = [
            d for d in dets
            if p.low_score_thresh <= d.score < p.high_score_thresh
        ]

        live = [t for t in self.tracks if t.status is not TrackStatus.REMOVED]
        for t in live:
            t.state = kalman.predict(t.state)
            t.frames_since_update += 1

        # Stage 1: all live tracks vs high-score detections.
        boxes1 = [t.state.bbox() for t in live]
        dets1 = [d.bbox for d in high]
        cost1 = 1.0 - iou_matrix(boxes1, dets1)
        m1, ur1, uc1 = assign(cost1, p.iou_match_thresh_stage1)

        matched: list[tuple[Track, Detection]] = []
        for ti, di in m1:
            matched.append((live[ti], high[di]))

        # Stage 2: leftover tracks that were active before this frame vs
        # low-score detections. Lost tracks are too stale for ambiguous
        # low-score evidence; tentative tracks need high-score support.
        stage2_tracks = [
            live[ti] for ti in ur1
            if live[ti].status is TrackStatus.ACTIVE
            and live[ti].frames_since_update == 1
        ]
        boxes2 = [t.state.bbox() for t in stage2_tracks]
        dets2 = [d.bbox for d in low]
        cost2 = 1.0 - iou_matrix(boxes2, dets2)
        m2, _, _ = assign(cost2, p.iou_match_thresh_stage2)
        matched2_ids = set()
        for ti, di in m2:
            matched.append((stage2_tracks[ti], low[di]))
            matched2_ids.add(stage2_tracks[ti].id)

        matched_track_ids = {t.id for t, _ in matched}
        for track, det in matched:
            track.state = kalman.update(track.state, det.bbox)
            track.frames_since_update = 0
            track.hits += 1
            track.last_score = det.score
            if track.status is TrackStatus.TENTATIVE:
                if track.hits >= p.min_hits_to_activate:
                    track.status = TrackStatus.ACTIVE
            else:
                track.status = TrackStatus.ACTIVE

        for track in live:
            if track.id in matched_track_ids:
                continue
            if track.status is TrackStatus.TENTATIVE:
                track.status = TrackStatus.REMOVED
            elif track.status is TrackStatus.ACTIVE:
                track.status = TrackStatus.LOST
            if (
                track.status is TrackStatus.LOST
                and track.frames_since_update > p.max_lost_frames
            ):
                track.status = TrackStatus.REMOVED

        matched_det_ids = {id(d) for _, d in matched}
        for det in high:
            if id(det) in matched_det_ids:
                continue
            if det.score >= p.new_track_score_thresh:
                self.tracks.append(self._new_track(det))

        self.tracks = [t for t in self.tracks if t.status is not TrackStatus.REMOVED]

        records = []
        for track in self.tracks:
            if track.status is not TrackStatus.ACTIVE:
                continue
            if track.frames_since_update > 0:
                continue
            records.append(
                TrackRecord(
                    frame_id=frame_id,
                    person_id=track.id,
                    bbox=track.state.bbox(),
                    score=track.last_score,
                )
            )
        records.sort(key=lambda r: r.person_id)
        return records


def run_sequence(
    dets_per_frame: list[list[Detection]],
    params: TrackerParams | None = None,
    first_frame: int = 1,
) -> list[TrackRecord]:
    """Track a whole sequence; frame IDs start at ``first_frame``."""
    tracker = ByteTracker(params)
    out: list[TrackRecord] = []
    for offset, dets in enumerate(dets_per_frame):
        out.extend(tracker.step(dets, first_frame + offset))
    return out
