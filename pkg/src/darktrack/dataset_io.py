"""Readers and writers for every on-disk artifact.

All text formats are UTF-8 with "\n" line endings and fixed decimal
formatting (coordinates 2 decimals, scores 6), so outputs are byte-identical
across platforms. Readers reject malformed lines outright, reporting the
1-based line number.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .calibration import Correspondence, Homography
from .cooperative import BrightnessLabel
from .errors import FormatError, InvariantViolation, ParseError
from .geometry import BBox, Detection, Mask, Point2
from .ho3 import HO3Landmark, LandmarkMap
from .tracker import TrackRecord


def _fmt(v: float) -> str:
    return f"{v:.2f}"


# ---------------------------------------------------------------- MOT CSV

def read_mot_csv(path) -> tuple[list[TrackRecord], list[tuple[int, Detection]]]:
    """Parse a MOTChallenge-style CSV.

    Lines are "frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z".
    Rows with id >= 1 become track records; rows with id == -1 are raw
    detections, returned as (frame_id, Detection) pairs. Returns
    (records, detections); one of the two is normally empty.
    """
    records: list[TrackRecord] = []
    detections: list[tuple[int, Detection]] = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 10:
            raise ParseError(f"expected 10 fields, got {len(parts)}", line_no)
        try:
            frame = int(parts[0])
            pid = int(parts[1])
            left, top, width, height, conf = (float(p) for p in parts[2:7])
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        if frame < 1:
            raise InvariantViolation(f"line {line_no}: frame {frame} < 1")
        if width <= 0 or height <= 0:
            raise InvariantViolation(
                f"line {line_no}: non-positive box {width}x{height}"
            )
        if not (0.0 <= conf <= 1.0) or not math.isfinite(conf):
            raise InvariantViolation(f"line {line_no}: score {conf} outside [0,1]")
        box = BBox(left, top, width, height)
        if pid == -1:
            detections.append((frame, Detection(box, conf)))
        elif pid >= 1:
            records.append(TrackRecord(frame, pid, box, conf))
        else:
            raise InvariantViolation(f"line {line_no}: bad id {pid}")
    records.sort(key=lambda r: (r.frame_id, r.person_id))
    detections.sort(key=lambda fd: fd[0])
    return records, detections


def read_tracks_csv(path) -> list[TrackRecord]:
    records, dets = read_mot_csv(path)
    if dets:
        raise InvariantViolation(f"{path} contains raw detections (id = -1)")
    return records


def read_detections_csv(path) -> dict[int, list[Detection]]:
    """Raw detections grouped by frame."""
    records, dets = read_mot_csv(path)
    if records:
        raise InvariantViolation(f"{path} contains track records (id >= 1)")
    out: dict[int, list[Detection]] = {}
    for frame, det in dets:
        out.setdefault(frame, []).append(det)
    return out


def write_mot_csv(records: list[TrackRecord], path) -> None:
    lines = [
        f"{r.frame_id},{r.person_id},{_fmt(r.bbox.left)},{_fmt(r.bbox.top)},"
        f"{_fmt(r.bbox.width)},{_fmt(r.bbox.height)},{r.score:.6f},-1,-1,-1"
        for r in sorted(records, key=lambda r: (r.frame_id, r.person_id))
    ]
    _write_lines(path, lines)


def write_detections_csv(dets_per_frame: dict[int, list[Detection]], path) -> None:
    lines = []
    for frame in sorted(dets_per_frame):
        for d in dets_per_frame[frame]:
            lines.append(
                f"{frame},-1,{_fmt(d.bbox.left)},{_fmt(d.bbox.top)},"
                f"{_fmt(d.bbox.width)},{_fmt(d.bbox.height)},{d.score:.6f},-1,-1,-1"
            )
    _write_lines(path, lines)


# ---------------------------------------------------------------- PGM masks

def read_mask_pgm(path) -> Mask:
    """Binary (P5) PGM, maxval 255; pixels > 127 become set bits."""
    data = Path(path).read_bytes()
    try:
        header, rest = _parse_pgm_header(data)
        width, height, maxval = header
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if maxval != 255:
        raise FormatError(f"{path}: unsupported maxval {maxval}")
    if len(rest) < width * height:
        raise FormatError(f"{path}: truncated payload")
    pixels = np.frombuffer(rest[: width * height], dtype=np.uint8)
    bits = (pixels > 127).reshape(height, width)
    return Mask(width, height, bits)


def _parse_pgm_header(data: bytes):
    if not data.startswith(b"P5"):
        raise ValueError("bad magic (expected P5)")
    tokens = []
    i = 2
    while len(tokens) < 3:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if i < len(data) and data[i:i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i:i + 1].isspace():
            i += 1
        if start == i:
            raise ValueError("truncated header")
        tokens.append(int(data[start:i]))
    i += 1  # single whitespace after maxval
    width, height, maxval = tokens
    if width <= 0 or height <= 0:
        raise ValueError(f"bad dimensions {width}x{height}")
    return (width, height, maxval), data[i:]


def write_mask_pgm(m: Mask, path) -> None:
    header = f"P5\n{m.width} {m.height}\n255\n".encode("ascii")
    payload = np.where(m.bits, 255, 0).astype(np.uint8).tobytes()
    Path(path).write_bytes(header + payload)


# ------------------------------------------------------------- landmarks

def write_landmarks(landmark_map: LandmarkMap, path) -> None:
    lines = []
    for fid in landmark_map.frame_ids():
        for lm in landmark_map.landmarks(fid):
            lines.append(f"{lm.frame_id} {lm.person_id} "
                         f"{int(lm.point.x)} {int(lm.point.y)}")
    _write_lines(path, lines)


def read_landmarks(path) -> LandmarkMap:
    frames: dict[int, list[HO3Landmark]] = {}
    for line_no, parts in _lines(path, 4):
        try:
            fid, pid, x, y = (int(p) for p in parts)
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        if pid < 1:
            raise ParseError(f"bad person id {pid}", line_no)
        frames.setdefault(fid, []).append(
            HO3Landmark(fid, pid, Point2(float(x), float(y)))
        )
    return LandmarkMap({fid: frames[fid] for fid in sorted(frames)})


# ------------------------------------------------------------ homography

def write_homography(h: Homography, path) -> None:
    _write_lines(path, [" ".join(f"{v:.12g}" for v in h.h.ravel())])


def read_homography(path) -> Homography:
    rows = list(_lines(path, 9))
    if len(rows) != 1:
        raise ParseError(f"expected exactly 1 line, got {len(rows)}")
    line_no, parts = rows[0]
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise ParseError(str(exc), line_no) from exc
    try:
        return Homography(np.array(vals).reshape(3, 3))
    except ValueError as exc:
        raise InvariantViolation(str(exc)) from exc


# ------------------------------------------------------------ brightness

def write_brightness(labels: dict[int, BrightnessLabel], path) -> None:
    lines = [f"{fid} {labels[fid].value}" for fid in sorted(labels)]
    _write_lines(path, lines)


def read_brightness(path) -> dict[int, BrightnessLabel]:
    out: dict[int, BrightnessLabel] = {}
    for line_no, parts in _lines(path, 2):
        try:
            fid = int(parts[0])
            label = BrightnessLabel(parts[1])
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        if fid in out:
            raise ParseError(f"duplicate frame {fid}", line_no)
        out[fid] = label
    return out


# -------------------------------------------------------- correspondences

def write_correspondences(cs: list[Correspondence], path) -> None:
    lines = [
        f"{_fmt(c.source.x)} {_fmt(c.source.y)} "
        f"{_fmt(c.target.x)} {_fmt(c.target.y)}"
        for c in cs
    ]
    _write_lines(path, lines)


def correspondences_from_tracks(
    source_tracks: list[TrackRecord],
    target_tracks: list[TrackRecord],
) -> list[Correspondence]:
    """Pair box bottom-centers of the same (frame, person ID) across cameras."""
    targets = {(r.frame_id, r.person_id): r for r in target_tracks}
    out = []
    for r in source_tracks:
        other = targets.get((r.frame_id, r.person_id))
        if other is None:
            continue
        out.append(Correspondence(
            Point2(r.bbox.left + r.bbox.width / 2.0, r.bbox.bottom),
            Point2(other.bbox.left + other.bbox.width / 2.0, other.bbox.bottom),
        ))
    return out


def read_correspondences(path) -> list[Correspondence]:
    out = []
    for line_no, parts in _lines(path, 4):
        try:
            sx, sy, tx, ty = (float(p) for p in parts)
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        out.append(Correspondence(Point2(sx, sy), Point2(tx, ty)))
    return out


# ------------------------------------------------------------- loop GT

def write_loop_gt(gt: dict[int, int], path) -> None:
    _write_lines(path, [f"{q} {gt[q]}" for q in sorted(gt)])


def read_loop_gt(path) -> dict[int, int]:
    out: dict[int, int] = {}
    for line_no, parts in _lines(path, 2):
        try:
            q, f = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        out[q] = f
    return out


# --------------------------------------------------------------- helpers

def _write_lines(path, lines: list[str]) -> None:
    text = "".join(line + "\n" for line in lines)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _lines(path, n_fields: int):
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != n_fields:
            raise ParseError(
                f"expected {n_fields} fields, got {len(parts)}", line_no
            )
        yield line_no, parts
