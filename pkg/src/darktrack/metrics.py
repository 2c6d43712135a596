"""Tracking evaluation: MOTA (with TP/FP/FN/IDSW), IDF1, and HOTA.

MOTA uses the CLEAR protocol: matches carry over from the previous frame
while they still overlap, remaining boxes are matched optimally by IoU, and
an identity switch is counted when a ground-truth ID is matched to a
different predictor ID than in its last match. IDF1 assigns identities
globally over whole trajectories; HOTA averages the geometric mean of
detection and association accuracy over localization thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import assign
from .errors import EmptyGroundTruth
from .geometry import iou, iou_matrix
from .tracker import TrackRecord

HOTA_ALPHAS = [round(0.05 * i, 2) for i in range(1, 20)]


@dataclass(frozen=True)
class MetricsReport:
    mota: float
    idf1: float
    hota: float
    tp: int
    fp: int
    fn: int
    idsw: int

    def lines(self) -> list[str]:
        """Machine-readable "metric value" lines."""
        return [
            f"mota {self.mota:.1f}",
            f"idf1 {self.idf1:.1f}",
            f"hota {self.hota:.1f}",
            f"tp {self.tp}",
            f"fp {self.fp}",
            f"fn {self.fn}",
            f"idsw {self.idsw}",
        ]


def _by_frame(records: list[TrackRecord]) -> dict[int, list[TrackRecord]]:
    out: dict[int, list[TrackRecord]] = {}
    for r in records:
        out.setdefault(r.frame_id, []).append(r)
    return out


def clear_match(
    gt_t: list[TrackRecord],
    pred_t: list[TrackRecord],
    prev: dict[int, int],
    iou_thresh: float = 0.5,
) -> tuple[list[tuple[int, int]], dict[int, int]]:
    """One frame of CLEAR matching.

    ``prev`` maps gt ID -> pred ID from the previous frame; pairs that still
    overlap at ``iou_thresh`` are kept before the optimal assignment fills in
    the rest. Returns (gt index, pred index) matches and the carried map.
    """
    matches: list[tuple[int, int]] = []
    used_gt: set[int] = set()
    used_pred: set[int] = set()

    pred_by_id = {r.person_id: i for i, r in enumerate(pred_t)}
    for gi, g in enumerate(gt_t):
        pid = prev.get(g.person_id)
        if pid is None or pid not in pred_by_id:
            continue
        pi = pred_by_id[pid]
        if pi in used_pred:
            continue
        if iou(g.bbox, pred_t[pi].bbox) >= iou_thresh:
            matches.append((gi, pi))
            used_gt.add(gi)
            used_pred.add(pi)

    rest_gt = [i for i in range(len(gt_t)) if i not in used_gt]
    rest_pred = [i for i in range(len(pred_t)) if i not in used_pred]
    if rest_gt and rest_pred:
        cost = 1.0 - iou_matrix(
            [gt_t[i].bbox for i in rest_gt],
            [pred_t[j].bbox for j in rest_pred],
        )
        extra, _, _ = assign(cost, iou_thresh)
        for r, c in extra:
            matches.append((rest_gt[r], rest_pred[c]))

    carried = {gt_t[gi].person_id: pred_t[pi].person_id for gi, pi in matches}
    return sorted(matches), carried


def compute_mota(
    gt: list[TrackRecord],
    pred: list[TrackRecord],
    iou_thresh: float = 0.5,
) -> MetricsReport:
    """CLEAR-MOT accuracy with counts; idf1/hota fields left at 0."""
    if not gt:
        raise EmptyGroundTruth("no ground-truth boxes")
    gt_frames = _by_frame(gt)
    pred_frames = _by_frame(pred)
    frame_ids = sorted(set(gt_frames) | set(pred_frames))

    tp = fp = fn = idsw = 0
    carry: dict[int, int] = {}
    last_match: dict[int, int] = {}
    for fid in frame_ids:
        gt_t = gt_frames.get(fid, [])
        pred_t = pred_frames.get(fid, [])
        matches, carry = clear_match(gt_t, pred_t, carry, iou_thresh)
        tp += len(matches)
        fn += len(gt_t) - len(matches)
        fp += len(pred_t) - len(matches)
        for gi, pi in matches:
            g_id = gt_t[gi].person_id
            p_id = pred_t[pi].person_id
            if g_id in last_match and last_match[g_id] != p_id:
                idsw += 1
            last_match[g_id] = p_id

    mota = 100.0 * (1.0 - (fn + fp + idsw) / len(gt))
    return MetricsReport(mota=mota, idf1=0.0, hota=0.0,
                         tp=tp, fp=fp, fn=fn, idsw=idsw)


def compute_idf1(
    gt: list[TrackRecord],
    pred: list[TrackRecord],
    iou_thresh: float = 0.5,
) -> float:
    """Identity F1 from the best global bijection between ID spaces."""
    if not gt:
        raise EmptyGroundTruth("no ground-truth boxes")
    if not pred:
        return 0.0
    gt_ids = sorted({r.person_id for r in gt})
    pred_ids = sorted({r.person_id for r in pred})
    gi = {g: i for i, g in enumerate(gt_ids)}
    pi = {p: i for i, p in enumerate(pred_ids)}

    # overlap[g][p] = frames where the pair co-occurs with IoU >= thresh
    overlap = np.zeros((len(gt_ids), len(pred_ids)))
    pred_frames = _by_frame(pred)
    for g in gt:
        for p in pred_frames.get(g.frame_id, []):
            if iou(g.bbox, p.bbox) >= iou_thresh:
                overlap[gi[g.person_id], pi[p.person_id]] += 1

    # Pad to square so unmatched identities cost nothing extra.
    size = max(len(gt_ids), len(pred_ids))
    padded = np.zeros((size, size))
    padded[: len(gt_ids), : len(pred_ids)] = overlap
    matches, _, _ = assign(1.0 - padded / (padded.max() + 1.0), gate=-1.0)
    idtp = sum(
        padded[r, c] for r, c in matches
    )
    idfn = len(gt) - idtp
    idfp = len(pred) - idtp
    return 100.0 * 2 * idtp / (2 * idtp + idfp + idfn)


def _hota_frame_matches(
    gt_t: list[TrackRecord],
    pred_t: list[TrackRecord],
    potential: np.ndarray,
    gi: dict[int, int],
    pi: dict[int, int],
    alpha: float,
) -> list[tuple[int, int]]:
    """Per-frame optimal matching favoring globally consistent identities."""
    if not gt_t or not pred_t:
        return []
    ious = iou_matrix([g.bbox for g in gt_t], [p.bbox for p in pred_t])
    score = np.zeros_like(ious)
    for a, g in enumerate(gt_t):
        for b, p in enumerate(pred_t):
            if ious[a, b] < alpha:
                continue
            score[a, b] = 1.0 + potential[gi[g.person_id], pi[p.person_id]]
    matches, _, _ = assign(1.0 - score / (score.max() + 1.0), gate=-1.0)
    return [(a, b) for a, b in matches if ious[a, b] >= alpha]


def compute_hota(
    gt: list[TrackRecord],
    pred: list[TrackRecord],
    alphas: list[float] | None = None,
) -> float:
    """Mean over localization thresholds of sqrt(DetA * AssA)."""
    if not gt:
        raise EmptyGroundTruth("no ground-truth boxes")
    alphas = alphas if alphas is not None else HOTA_ALPHAS
    gt_ids = sorted({r.person_id for r in gt})
    pred_ids = sorted({r.person_id for r in pred})
    gi = {g: i for i, g in enumerate(gt_ids)}
    pi = {p: i for i, p in enumerate(pred_ids)}
    gt_frames = _by_frame(gt)
    pred_frames = _by_frame(pred)
    frame_ids = sorted(set(gt_frames) | set(pred_frames))
    gt_total = {g: 0 for g in gt_ids}
    pred_total = {p: 0 for p in pred_ids}
    for r in gt:
        gt_total[r.person_id] += 1
    for r in pred:
        pred_total[r.person_id] += 1

    scores = []
    for alpha in alphas:
        # Pass 1: potential-match counts between identity pairs.
        potential = np.zeros((len(gt_ids), len(pred_ids)))
        frame_ious: dict[int, np.ndarray] = {}
        for fid in frame_ids:
            gt_t = gt_frames.get(fid, [])
            pred_t = pred_frames.get(fid, [])
            if not gt_t or not pred_t:
                continue
            ious = iou_matrix([g.bbox for g in gt_t], [p.bbox for p in pred_t])
            frame_ious[fid] = ious
            for a, g in enumerate(gt_t):
                for b, p in enumerate(pred_t):
                    if ious[a, b] >= alpha:
                        potential[gi[g.person_id], pi[p.person_id]] += 1

        # Pass 2: per-frame optimal matching weighted by those counts.
        tp = 0
        matched = np.zeros((len(gt_ids), len(pred_ids)))
        tp_pairs: list[tuple[int, int]] = []
        for fid in frame_ids:
            gt_t = gt_frames.get(fid, [])
            pred_t = pred_frames.get(fid, [])
            for a, b in _hota_frame_matches(gt_t, pred_t, potential, gi, pi, alpha):
                g_idx = gi[gt_t[a].person_id]
                p_idx = pi[pred_t[b].person_id]
                matched[g_idx, p_idx] += 1
                tp_pairs.append((g_idx, p_idx))
                tp += 1
        fn = len(gt) - tp
        fp = len(pred) - tp
        if tp == 0:
            scores.append(0.0)
            continue
        det_a = tp / (tp + fn + fp)
        ass = 0.0
        for g_idx, p_idx in tp_pairs:
            tpa = matched[g_idx, p_idx]
            fna = gt_total[gt_ids[g_idx]] - tpa
            fpa = pred_total[pred_ids[p_idx]] - tpa
            ass += tpa / (tpa + fna + fpa)
        ass_a = ass / tp
        scores.append(float(np.sqrt(det_a * ass_a)))
    return 100.0 * float(np.mean(scores))


def evaluate(
    gt: list[TrackRecord],
    pred: list[TrackRecord],
    iou_thresh: float = 0.5,
) -> MetricsReport:
    """Full report: MOTA counts plus IDF1 and HOTA."""
    base = compute_mota(gt, pred, iou_thresh)
    return MetricsReport(
        mota=base.mota,
        idf1=compute_idf1(gt, pred, iou_thresh),
        hota=compute_hota(gt, pred),
        tp=base.tp,
        fp=base.fp,
        fn=base.fn,
        idsw=base.idsw,
    )
