"""Deterministic synthetic scenes for desk-scale pipeline verification.

Persons are filled rectangles with a semicircular head bump, walking in
horizontal lanes inside a world that can be wider than the camera window.
Static rectangular occluders sit in front of the persons; the camera can
translate along x, with per-object parallax (closer objects shift more), so
a revisited camera position reproduces the same landmark geometry.

Detection noise is modality-dependent: RGB detections collapse in dark
frames while thermal detections barely notice brightness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cooperative import BrightnessLabel, FrameStats
from .errors import ConfigInvalid, NoLoopConfigured
from .geometry import BBox, Detection, Mask
from .tracker import TrackRecord


@dataclass(frozen=True)
class Occluder:
    """World-space rectangle; smaller depth = closer to the camera."""

    left: float
    top: float
    width: float
    height: float
    depth: float


@dataclass(frozen=True)
class DetectionModel:
    prob: float
    score_lo: float
    score_hi: float
    jitter: float


@dataclass(frozen=True)
class BrightnessSpan:
    """Inclusive frame range carrying one brightness label."""

    start: int
    end: int
    label: BrightnessLabel


@dataclass(frozen=True)
class SimConfig:
    width: int = 160
    height: int = 120
    world_width: float = 160.0
    n_persons: int = 4
    person_width: tuple[float, float] = (10.0, 16.0)
    person_height: tuple[float, float] = (26.0, 38.0)
    person_depth: tuple[float, float] = (5.0, 9.0)
    occluders: tuple[Occluder, ...] = ()
    motion: str = "waypoints"  # or "random-walk"
    speed: float = 1.0
    n_frames: int = 300
    brightness: tuple[BrightnessSpan, ...] | None = None  # None = all bright
    rgb_bright: DetectionModel = DetectionModel(0.98, 0.75, 0.99, 1.0)
    rgb_dark: DetectionModel = DetectionModel(0.02, 0.0, 0.2, 1.0)
    thermal: DetectionModel = DetectionModel(0.95, 0.5, 0.95, 1.0)
    depth_cam: DetectionModel = DetectionModel(0.90, 0.5, 0.90, 2.0)
    loop_offsets: tuple[float, ...] | None = None
    parallax_depth: float = 4.0
    occlusion_suppress: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.n_persons < 1 or self.n_frames < 1:
            raise ConfigInvalid("need n_persons >= 1 and n_frames >= 1")
        if self.width < 8 or self.height < 8:
            raise ConfigInvalid("image too small")
        if self.loop_offsets is not None and len(self.loop_offsets) != self.n_frames:
            raise ConfigInvalid("loop_offsets must have one entry per frame")
        if self.brightness is not None:
            covered = np.zeros(self.n_frames, dtype=int)
            for span in self.brightness:
                if span.start < 1 or span.end > self.n_frames or span.start > span.end:
                    raise ConfigInvalid(f"bad brightness span {span}")
                covered[span.start - 1: span.end] += 1
            if not np.all(covered == 1):
                raise ConfigInvalid("brightness spans must partition the timeline")

    def label_for(self, frame_id: int) -> BrightnessLabel:
        if self.brightness is None:
            return BrightnessLabel.BRIGHT
        for span in self.brightness:
            if span.start <= frame_id <= span.end:
                return span.label
        raise ConfigInvalid(f"frame {frame_id} not covered by schedule")


@dataclass(frozen=True)
class SimDataset:
    width: int
    height: int
    n_frames: int
    gt: list[TrackRecord]
    masks: dict[int, Mask] = field(repr=False)
    dets_rgb: dict[int, list[Detection]] = field(repr=False)
    dets_t: dict[int, list[Detection]] = field(repr=False)
    dets_d: dict[int, list[Detection]] = field(repr=False)
    brightness: list[FrameStats] = field(repr=False)
    labels: dict[int, BrightnessLabel] = field(repr=False)
    gt_loop: dict[int, int] | None = None


@dataclass
class _Person:
    pid: int
    width: float
    height: float
    depth: float
    bottom: float  # lane (image y of feet)
    x: float  # world x of box center
    direction: float = 1.0


def _silhouette(bits: np.ndarray, left: float, top: float, w: float, h: float):
    """Rasterize body rectangle + semicircular head into ``bits`` (in place)."""
    img_h, img_w = bits.shape
    r = w / 2.0
    cx = left + r
    head_cy = top + r
    ys, xs = np.mgrid[0:img_h, 0:img_w]
    pcx = xs + 0.5
    pcy = ys + 0.5
    body = (
        (pcx >= left) & (pcx < left + w)
        & (pcy >= top + r) & (pcy < top + h)
    )
    head = (
        ((pcx - cx) ** 2 + (pcy - head_cy) ** 2 <= r * r)
        & (pcy < top + r)
    )
    bits |= body | head


def _init_persons(c: SimConfig, rng: np.random.Generator) -> list[_Person]:
    lanes = np.linspace(0.45 * c.height, c.height - 2.0, c.n_persons)
    persons = []
    for i in range(c.n_persons):
        w = rng.uniform(*c.person_width)
        h = rng.uniform(*c.person_height)
        depth = rng.uniform(*c.person_depth)
        bottom = float(lanes[i])
        h = min(h, bottom - 2.0)
        x = rng.uniform(w, c.world_width - w)
        direction = 1.0 if rng.random() < 0.5 else -1.0
        persons.append(_Person(i + 1, w, h, depth, bottom, x, direction))
    return persons


def _advance(c: SimConfig, p: _Person, rng: np.random.Generator):
    if c.motion == "waypoints":
        p.x += p.direction * c.speed
        lo, hi = p.width, c.world_width - p.width
        if p.x < lo:
            p.x = lo
            p.direction = 1.0
        elif p.x > hi:
            p.x = hi
            p.direction = -1.0
    elif c.motion == "random-walk":
        p.x = float(np.clip(p.x + rng.normal(0.0, c.speed),
                            p.width, c.world_width - p.width))
    else:
        raise ConfigInvalid(f"unknown motion model {c.motion!r}")


def _jittered_detection(
    gt_box: BBox, model: DetectionModel, rng: np.random.Generator,
    width: int, height: int,
) -> Detection | None:
    left = gt_box.left + rng.normal(0.0, model.jitter)
    top = gt_box.top + rng.normal(0.0, model.jitter)
    w = max(2.0, gt_box.width + rng.normal(0.0, model.jitter))
    h = max(2.0, gt_box.height + rng.normal(0.0, model.jitter))
    left = max(0.0, left)
    top = max(0.0, top)
    w = min(w, width - left)
    h = min(h, height - top)
    if w < 2.0 or h < 2.0:
        return None
    score = float(rng.uniform(model.score_lo, model.score_hi))
    return Detection(BBox(left, top, w, h), score)


def simulate(c: SimConfig) -> SimDataset:
    """Render the configured scene; bit-identical for a fixed config."""
    rng = np.random.default_rng(c.seed)
    persons = _init_persons(c, rng)

    gt: list[TrackRecord] = []
    masks: dict[int, Mask] = {}
    dets_rgb: dict[int, list[Detection]] = {}
    dets_t: dict[int, list[Detection]] = {}
    dets_d: dict[int, list[Detection]] = {}
    stats: list[FrameStats] = []
    labels: dict[int, BrightnessLabel] = {}

    for frame_id in range(1, c.n_frames + 1):
        label = c.label_for(frame_id)
        labels[frame_id] = label
        offset = c.loop_offsets[frame_id - 1] if c.loop_offsets else 0.0

        if label is BrightnessLabel.BRIGHT:
            intensity = float(np.clip(rng.normal(160.0, 4.0), 0.0, 255.0))
        else:
            intensity = float(np.clip(rng.normal(18.0, 3.0), 0.0, 255.0))
        stats.append(FrameStats(frame_id, intensity))

        # Occluder footprints in image space, split by depth.
        occ_rasters: list[tuple[float, np.ndarray]] = []
        for occ in c.occluders:
            shift = offset * c.parallax_depth / occ.depth
            raster = np.zeros((c.height, c.width), bool)
            _rect(raster, occ.left - shift, occ.top, occ.width, occ.height)
            occ_rasters.append((occ.depth, raster))

        frame_mask = np.zeros((c.height, c.width), bool)
        dets_rgb[frame_id] = []
        dets_t[frame_id] = []
        dets_d[frame_id] = []
        rgb_model = c.rgb_bright if label is BrightnessLabel.BRIGHT else c.rgb_dark

        for p in persons:
            shift = offset * c.parallax_depth / p.depth
            left = p.x - p.width / 2.0 - shift
            top = p.bottom - p.height
            sil = np.zeros((c.height, c.width), bool)
            _silhouette(sil, left, top, p.width, p.height)
            total = int(sil.sum())
            if total == 0:
                continue
            visible = sil.copy()
            for occ_depth, raster in occ_rasters:
                if occ_depth < p.depth:
                    visible &= ~raster
            n_visible = int(visible.sum())
            if n_visible == 0:
                continue
            frame_mask |= visible

            g_left = max(0.0, left)
            g_top = max(0.0, top)
            g_right = min(float(c.width), left + p.width)
            g_bottom = min(float(c.height), top + p.height)
            if g_right - g_left < 1.0 or g_bottom - g_top < 1.0:
                continue
            gt_box = BBox(g_left, g_top, g_right - g_left, g_bottom - g_top)
            gt.append(TrackRecord(frame_id, p.pid, gt_box, 1.0))

            occluded = 1.0 - n_visible / total
            for model, sink in (
                (rgb_model, dets_rgb[frame_id]),
                (c.thermal, dets_t[frame_id]),
                (c.depth_cam, dets_d[frame_id]),
            ):
                roll = rng.random()
                if occluded > c.occlusion_suppress:
                    continue
                if roll >= model.prob:
                    continue
                det = _jittered_detection(gt_box, model, rng, c.width, c.height)
                if det is not None:
                    sink.append(det)

        masks[frame_id] = Mask(c.width, c.height, frame_mask)
        for p in persons:
            _advance(c, p, rng)

    gt_loop = loop_ground_truth(c) if c.loop_offsets else None
    return SimDataset(
        width=c.width, height=c.height, n_frames=c.n_frames,
        gt=gt, masks=masks, dets_rgb=dets_rgb, dets_t=dets_t, dets_d=dets_d,
        brightness=stats, labels=labels, gt_loop=gt_loop,
    )


def _rect(bits: np.ndarray, left: float, top: float, w: float, h: float):
    img_h, img_w = bits.shape
    x0 = max(0, math.ceil(left - 0.5))
    x1 = min(img_w - 1, math.ceil(left + w - 0.5) - 1)
    y0 = max(0, math.ceil(top - 0.5))
    y1 = min(img_h - 1, math.ceil(top + h - 0.5) - 1)
    if x0 <= x1 and y0 <= y1:
        bits[y0:y1 + 1, x0:x1 + 1] = True


def loop_ground_truth(c: SimConfig) -> dict[int, int]:
    """For each frame after the trajectory's apex, the earlier frame whose
    camera position is closest (first minimum wins ties)."""
    if c.loop_offsets is None:
        raise NoLoopConfigured("config has no loop trajectory")
    offsets = np.asarray(c.loop_offsets, dtype=float)
    turn = int(np.argmax(offsets)) + 1  # 1-based frame of the apex
    gt: dict[int, int] = {}
    for query in range(turn + 1, c.n_frames + 1):
        dists = np.abs(offsets[:turn] - offsets[query - 1])
        gt[query] = int(np.argmin(dists)) + 1
    return gt


def out_and_back_offsets(n_frames: int, amplitude: float) -> tuple[float, ...]:
    """Linear out-and-back trajectory peaking mid-sequence."""
    half = n_frames // 2
    out = [amplitude * t / half for t in range(half + 1)]
    back = [amplitude * (n_frames - 1 - t) / (n_frames - 1 - half)
            for t in range(half + 1, n_frames)]
    return tuple(out + back)


def loop_scene_config(
    n_frames: int = 400,
    amplitude: float = 30.0,
    seed: int = 0,
) -> SimConfig:
    """Canonical loop-closure scene: near-static persons behind a two-depth
    fence, camera translating out and back.

    The fence alternates between near segments (lower top edge) and far
    segments (higher top edge). An occluded person therefore leaves
    landmarks on two rows, with step positions at the segment boundaries;
    because the two depths shift at different parallax rates, the step
    pattern uniquely encodes the camera offset.
    """
    occluders = [
        # Continuous far fence: guarantees every column is occluded.
        Occluder(left=-200.0, top=95.0, width=700.0, height=25.0, depth=5.0),
    ]
    # Random-height pickets at varied depths. Their ragged skyline, and the
    # offset-dependent way pickets at different depths interleave, make the
    # landmark pattern specific to the camera position.
    rng = np.random.default_rng(seed + 77)
    x = -220.0
    while x < 440.0:
        width = float(rng.uniform(4.0, 7.0))
        occluders.append(Occluder(
            left=x,
            top=float(rng.uniform(72.0, 93.0)),
            width=width,
            height=50.0,
            depth=float(rng.uniform(1.8, 3.5)),
        ))
        x += width + float(rng.uniform(1.0, 3.0))
    return SimConfig(
        world_width=260.0,
        n_persons=14,
        person_depth=(6.0, 9.0),
        occluders=tuple(occluders),
        motion="random-walk",
        speed=0.05,
        n_frames=n_frames,
        loop_offsets=out_and_back_offsets(n_frames, amplitude),
        seed=seed,
    )
