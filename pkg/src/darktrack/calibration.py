"""Homography estimation between co-located camera image planes.

Estimation is the normalized direct linear transform: both point sets are
translated to their centroid and scaled to mean distance sqrt(2), the 2n x 9
design matrix's null vector gives the homography, and the normalization is
undone afterwards. An optional robust mode wraps it in a 4-point RANSAC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateConfiguration,
    InsufficientPoints,
    PointAtInfinity,
)
from .geometry import BBox, Point2


@dataclass(frozen=True)
class Correspondence:
    source: Point2
    target: Point2


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, normalized so h[2,2] = 1 when nonzero."""

    h: np.ndarray = field(repr=False)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float).reshape(3, 3).copy()
        if abs(h[2, 2]) > 1e-12:
            h /= h[2, 2]
        else:
            h /= np.linalg.norm(h)
        if abs(np.linalg.det(h)) <= 1e-12:
            raise ValueError("homography is singular")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.h))

    def compose(self, other: "Homography") -> "Homography":
        """self after other: (self.compose(other))(p) == self(other(p))."""
        return Homography(self.h @ other.h)


def _normalization(points: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to the origin, mean distance sqrt(2)."""
    centroid = points.mean(axis=0)
    dists = np.linalg.norm(points - centroid, axis=1)
    mean_dist = dists.mean()
    if mean_dist < 1e-12:
        raise DegenerateConfiguration("all points coincide")
    s = math.sqrt(2.0) / mean_dist
    return np.array([
        [s, 0.0, -s * centroid[0]],
        [0.0, s, -s * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


def estimate_homography(
    correspondences: list[Correspondence],
    robust: bool = False,
    ransac_iterations: int = 500,
    inlier_threshold: float = 3.0,
    seed: int = 0,
) -> Homography:
    """Fit the homography mapping sources onto targets.

    With ``robust=True``, runs RANSAC over 4-point minimal samples (inlier
    threshold in pixels on the target plane) and refits on the inlier set.
    """
    n = len(correspondences)
    if n < 4:
        raise InsufficientPoints(f"need >= 4 correspondences, got {n}")
    src = np.array([[c.source.x, c.source.y] for c in correspondences])
    dst = np.array([[c.target.x, c.target.y] for c in correspondences])

    if not robust:
        return _dlt(src, dst)

    rng = np.random.default_rng(seed)
    best_inliers: np.ndarray | None = None
    for _ in range(ransac_iterations):
        idx = rng.choice(n, size=4, replace=False)
        try:
            h = _dlt(src[idx], dst[idx])
        except DegenerateConfiguration:
            continue
        warped = _apply(h.h, src)
        good = np.linalg.norm(warped - dst, axis=1) <= inlier_threshold
        if best_inliers is None or good.sum() > best_inliers.sum():
            best_inliers = good
    if best_inliers is None or best_inliers.sum() < 4:
        raise DegenerateConfiguration("RANSAC found no 4-point consensus")
    return _dlt(src[best_inliers], dst[best_inliers])


def _dlt(src: np.ndarray, dst: np.ndarray) -> Homography:
    t_src = _normalization(src)
    t_dst = _normalization(dst)
    src_n = _apply(t_src, src)
    dst_n = _apply(t_dst, dst)

    rows = []
    for (x, y), (u, v) in zip(src_n, dst_n):
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y, -u])
    a = np.asarray(rows, dtype=float)

    _, sv, vt = np.linalg.svd(a)
    # Rank < 8 means the solution is not unique (e.g. collinear points).
    if sv[0] < 1e-12 or sv[-2] / sv[0] < 1e-10:
        raise DegenerateConfiguration("rank-deficient design matrix")
    h_n = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_dst) @ h_n @ t_src
    try:
        return Homography(h)
    except ValueError as exc:
        raise DegenerateConfiguration(str(exc)) from exc


def _apply(h: np.ndarray, points: np.ndarray) -> np.ndarray:
    homog = np.column_stack([points, np.ones(len(points))])
    mapped = homog @ h.T
    return mapped[:, :2] / mapped[:, 2:3]


def warp_point(h: Homography, p: Point2) -> Point2:
    """Projective application of the homography to a point."""
    x, y, w = h.h @ np.array([p.x, p.y, 1.0])
    if abs(w) <= 1e-12:
        raise PointAtInfinity(f"point ({p.x}, {p.y}) maps to infinity")
    return Point2(x / w, y / w)


def warp_bbox(h: Homography, b: BBox) -> BBox:
    """Axis-aligned hull of the box's four warped corners."""
    warped = [warp_point(h, c) for c in b.corners()]
    xs = [p.x for p in warped]
    ys = [p.y for p in warped]
    return BBox(min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys))


def reprojection_rmse(h: Homography, correspondences: list[Correspondence]) -> float:
    """Root-mean-square distance between warped sources and targets."""
    if not correspondences:
        raise InsufficientPoints("empty correspondence list")
    sq = 0.0
    for c in correspondences:
        w = warp_point(h, c.source)
        sq += (w.x - c.target.x) ** 2 + (w.y - c.target.y) ** 2
    return math.sqrt(sq / len(correspondences))
