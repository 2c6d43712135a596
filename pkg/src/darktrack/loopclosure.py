"""Loop closure by affine RANSAC over occlusion-boundary landmark sets.

A query frame's landmarks are matched against every eligible past frame:
minimal samples of three point correspondences hypothesize an affine map,
inliers are counted one-to-one, and past frames are ranked by their best
inlier count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DegenerateSample, MissingGroundTruth
from .geometry import Point2
from .ho3 import HO3Landmark, LandmarkMap


@dataclass(frozen=True)
class Affine2D:
    """2x3 affine: 2x2 linear part plus translation column."""

    a: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(2, 3).copy()
        if abs(np.linalg.det(a[:, :2])) <= 1e-9:
            raise ValueError("degenerate linear part")
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    @classmethod
    def identity(cls) -> "Affine2D":
        return cls(np.hstack([np.eye(2), np.zeros((2, 1))]))

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.a[:, :2].T + self.a[:, 2]

    def apply_point(self, p: Point2) -> Point2:
        x, y = self.apply(np.array([[p.x, p.y]]))[0]
        return Point2(float(x), float(y))


@dataclass(frozen=True)
class RansacParams:
    iterations: int = 500
    inlier_tol: float = 3.0
    min_inliers: int = 4
    seed: int = 0
    max_scale: float = 3.0
    # Partner sampling radius; None samples partners from all past points.
    gate_radius: float | None = None

    def __post_init__(self):
        if self.iterations < 1 or self.inlier_tol <= 0 or self.max_scale < 1:
            raise ValueError("invalid RANSAC parameters")


@dataclass(frozen=True)
class Ranking:
    query_frame: int
    candidates: list[tuple[int, int]]  # (frame_id, inlier count), best first


def solve_affine(pairs: list[tuple[Point2, Point2]]) -> Affine2D:
    """Exact affine from exactly three point correspondences."""
    if len(pairs) != 3:
        raise ValueError(f"need exactly 3 pairs, got {len(pairs)}")
    src = np.array([[p.x, p.y, 1.0] for p, _ in pairs])
    dst = np.array([[q.x, q.y] for _, q in pairs])
    if abs(np.linalg.det(src)) <= 1e-9:
        raise DegenerateSample("collinear source points")
    sol = np.linalg.solve(src, dst)  # (3, 2): rows are a-col, b-col, t
    a = np.hstack([sol[:2].T, sol[2:3].T])
    try:
        return Affine2D(a)
    except ValueError as exc:
        raise DegenerateSample(str(exc)) from exc


def candidate_pairs(
    query: list[HO3Landmark],
    past: list[HO3Landmark],
    gate_radius: float | None = None,
) -> list[tuple[Point2, Point2]]:
    """All (query, past) point pairs within the gate radius (ungated: all)."""
    out = []
    for q in query:
        for p in past:
            if gate_radius is not None:
                dx = q.point.x - p.point.x
                dy = q.point.y - p.point.y
                if dx * dx + dy * dy > gate_radius * gate_radius:
                    continue
            out.append((q.point, p.point))
    return out


def _points(landmarks: list[HO3Landmark]) -> np.ndarray:
    return np.array([[lm.point.x, lm.point.y] for lm in landmarks], dtype=float)


def _greedy_one_to_one(dist: np.ndarray, tol: float) -> int:
    """Count of one-to-one matches within tol, taken greedily by distance."""
    ii, jj = np.nonzero(dist <= tol)
    if len(ii) == 0:
        return 0
    order = np.argsort(dist[ii, jj], kind="stable")
    used_i = np.zeros(dist.shape[0], bool)
    used_j = np.zeros(dist.shape[1], bool)
    count = 0
    for k in order:
        i, j = ii[k], jj[k]
        if used_i[i] or used_j[j]:
            continue
        used_i[i] = used_j[j] = True
        count += 1
    return count


def ransac_match(
    query: list[HO3Landmark],
    past: list[HO3Landmark],
    p: RansacParams,
) -> tuple[Affine2D | None, int]:
    """Best affine from query landmarks onto past landmarks.

    Deterministic given the seed. Returns (None, best count) when the best
    hypothesis supports fewer than ``min_inliers`` one-to-one inliers.
    """
    if len(query) < 3 or len(past) < 3:
        return None, 0
    q = _points(query)
    t = _points(past)
    n, m = len(q), len(t)

    if p.gate_radius is not None:
        gate_ok = cdist(q, t) <= p.gate_radius
        partner_lists = [np.nonzero(gate_ok[i])[0] for i in range(n)]
    else:
        partner_lists = None

    rng = np.random.default_rng(p.seed)
    samples_src = []
    samples_dst = []
    for _ in range(p.iterations):
        qi = rng.choice(n, size=3, replace=False)
        if partner_lists is None:
            ti = rng.integers(0, m, size=3)
        else:
            cands = [partner_lists[i] for i in qi]
            if any(len(c) == 0 for c in cands):
                continue
            ti = np.array([c[rng.integers(0, len(c))] for c in cands])
        if len(set(ti.tolist())) < 3:
            continue
        samples_src.append(q[qi])
        samples_dst.append(t[ti])
    if not samples_src:
        return None, 0

    src = np.stack(samples_src)  # (k, 3, 2)
    dst = np.stack(samples_dst)
    ones = np.ones((src.shape[0], 3, 1))
    design = np.concatenate([src, ones], axis=2)  # (k, 3, 3)
    dets = np.linalg.det(design)
    valid = np.abs(dets) > 1e-9
    if not valid.any():
        return None, 0
    sols = np.full((src.shape[0], 3, 2), np.nan)
    sols[valid] = np.linalg.solve(design[valid], dst[valid])
    linear = np.transpose(sols[:, :2, :], (0, 2, 1))  # (k, 2, 2)
    trans = sols[:, 2, :]

    sv = np.full((src.shape[0], 2), np.nan)
    sv[valid] = np.linalg.svd(linear[valid], compute_uv=False)
    scale_ok = valid & (sv[:, 0] <= p.max_scale) & (sv[:, 1] >= 1.0 / p.max_scale)

    best_count = 0
    best_model: Affine2D | None = None
    for k in np.nonzero(scale_ok)[0]:
        tq = q @ linear[k].T + trans[k]
        dist = cdist(tq, t)
        # Cheap bound: ignoring one-to-one, at most this many inliers.
        upper = int((dist.min(axis=1) <= p.inlier_tol).sum())
        if upper <= best_count:
            continue
        count = _greedy_one_to_one(dist, p.inlier_tol)
        if count > best_count:
            best_count = count
            best_model = Affine2D(np.hstack([linear[k], trans[k][:, None]]))
    if best_count < p.min_inliers:
        return None, best_count
    return best_model, best_count


def rank_past_frames(
    landmark_map: LandmarkMap,
    query_frame: int,
    exclusion: int = 50,
    p: RansacParams = RansacParams(),
    threads: int = 1,
) -> Ranking:
    """Score every sufficiently old frame against the query and rank.

    Each candidate frame gets its own PRNG stream derived from the base seed
    and the candidate frame ID, so parallel and serial runs agree exactly.
    Ties rank the temporally closer frame first.
    """
    if query_frame not in landmark_map.frames:
        raise KeyError(f"query frame {query_frame} not in landmark map")
    query = landmark_map.landmarks(query_frame)
    eligible = [
        f for f in landmark_map.frame_ids() if f <= query_frame - exclusion
    ]

    def score(fid: int) -> tuple[int, int]:
        sub_seed = np.random.SeedSequence([p.seed, fid]).generate_state(1)[0]
        sub = RansacParams(
            iterations=p.iterations,
            inlier_tol=p.inlier_tol,
            min_inliers=p.min_inliers,
            seed=int(sub_seed),
            max_scale=p.max_scale,
            gate_radius=p.gate_radius,
        )
        _, count = ransac_match(query, landmark_map.landmarks(fid), sub)
        return fid, count

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scored = list(pool.map(score, eligible))
    else:
        scored = [score(f) for f in eligible]

    scored.sort(key=lambda fc: (-fc[1], abs(query_frame - fc[0]), fc[0]))
    return Ranking(query_frame=query_frame, candidates=scored)


def topk_accuracy(
    rankings: list[Ranking],
    gt: dict[int, int],
    k: int = 5,
    tol: int = 0,
) -> float:
    """Fraction of rankings whose top-k contains a frame within tol of GT."""
    if not rankings:
        return 0.0
    hits = 0
    for ranking in rankings:
        if ranking.query_frame not in gt:
            raise MissingGroundTruth(
                f"no ground truth for query frame {ranking.query_frame}"
            )
        target = gt[ranking.query_frame]
        top = ranking.candidates[:k]
        if any(abs(fid - target) <= tol for fid, _ in top):
            hits += 1
    return hits / len(rankings)
