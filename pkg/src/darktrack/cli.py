"""Command-line surface composing the library into shell pipelines.

One binary, subcommand style. Every tunable has a flag with its default
visible in --help. Exit codes: 0 success, 1 usage error, 2 data error. All
randomness flows from --seed; identical invocations produce byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import dataset_io as dio
from .calibration import estimate_homography, reprojection_rmse
from .cooperative import (
    BrightnessLabel,
    IdPairTable,
    export_pseudo_labels,
    fuse_frame,
    switch_frame,
)
from .errors import DarktrackError
from .geometry import Detection, Mask
from .ho3 import build_landmark_map
from .loopclosure import RansacParams, rank_past_frames, topk_accuracy
from .metrics import MetricsReport, evaluate
from .simulator import (
    BrightnessSpan,
    DetectionModel,
    SimConfig,
    loop_scene_config,
    simulate,
)
from .tracker import TrackerParams, TrackRecord, run_sequence


def _default_threads() -> int:
    return int(os.environ.get("DARKTRACK_THREADS", "1"))


def _add_tracker_flags(p: argparse.ArgumentParser):
    d = TrackerParams()
    p.add_argument("--high-score-thresh", type=float, default=d.high_score_thresh)
    p.add_argument("--low-score-thresh", type=float, default=d.low_score_thresh)
    p.add_argument("--stage1-gate", type=float, default=d.iou_match_thresh_stage1)
    p.add_argument("--stage2-gate", type=float, default=d.iou_match_thresh_stage2)
    p.add_argument("--new-track-thresh", type=float,
                   default=d.new_track_score_thresh)
    p.add_argument("--max-lost", type=int, default=d.max_lost_frames)
    p.add_argument("--min-hits", type=int, default=d.min_hits_to_activate)


def _tracker_params(args) -> TrackerParams:
    return TrackerParams(
        high_score_thresh=args.high_score_thresh,
        low_score_thresh=args.low_score_thresh,
        iou_match_thresh_stage1=args.stage1_gate,
        iou_match_thresh_stage2=args.stage2_gate,
        new_track_score_thresh=args.new_track_thresh,
        max_lost_frames=args.max_lost,
        min_hits_to_activate=args.min_hits,
    )


def cmd_track(args) -> int:
    dets = dio.read_detections_csv(args.dets)
    if dets:
        first, last = min(dets), max(dets)
    else:
        first, last = 1, 0
    per_frame = [dets.get(f, []) for f in range(first, last + 1)]
    records = run_sequence(per_frame, _tracker_params(args), first_frame=first)
    dio.write_mot_csv(records, args.out)
    print(f"tracked {len(records)} records over {len(per_frame)} frames")
    return 0


def cmd_calibrate(args) -> int:
    cs = dio.read_correspondences(args.correspondences)
    h = estimate_homography(
        cs,
        robust=args.robust,
        ransac_iterations=args.ransac_iterations,
        inlier_threshold=args.inlier_threshold,
        seed=args.seed,
    )
    dio.write_homography(h, args.out)
    print(f"reprojection_rmse {reprojection_rmse(h, cs):.4f}")
    return 0


def cmd_pseudo_label(args) -> int:
    tracks = dio.read_tracks_csv(args.tracks)
    h = dio.read_homography(args.homography)
    width, height = _parse_size(args.bounds)
    labels = export_pseudo_labels(tracks, h, (width, height), args.min_score)
    dio.write_mot_csv(labels.records, args.out)
    print(f"exported {len(labels.records)} pseudo-labels, dropped {labels.dropped}")
    return 0


def _group(records: list[TrackRecord]) -> dict[int, list[TrackRecord]]:
    out: dict[int, list[TrackRecord]] = {}
    for r in records:
        out.setdefault(r.frame_id, []).append(r)
    return out


def cmd_fuse(args) -> int:
    a = _group(dio.read_tracks_csv(args.a))
    b = _group(dio.read_tracks_csv(args.b))
    table = IdPairTable()
    out: list[TrackRecord] = []
    for frame in sorted(set(a) | set(b)):
        out.extend(fuse_frame(a.get(frame, []), b.get(frame, []),
                              table, args.iou_gate))
    dio.write_mot_csv(out, args.out)
    print(f"fused {len(out)} records")
    return 0


def cmd_switch(args) -> int:
    rgb = _group(dio.read_tracks_csv(args.rgb))
    t = _group(dio.read_tracks_csv(args.thermal))
    schedule = dio.read_brightness(args.brightness)
    table = IdPairTable()
    out: list[TrackRecord] = []
    for frame in sorted(set(rgb) | set(t) | set(schedule)):
        label = schedule.get(frame, BrightnessLabel.BRIGHT)
        out.extend(switch_frame(rgb.get(frame, []), t.get(frame, []),
                                label, table, args.iou_gate))
    dio.write_mot_csv(out, args.out)
    print(f"switched {len(out)} records")
    return 0


def _read_masks_dir(path) -> dict[int, Mask]:
    masks: dict[int, Mask] = {}
    for f in sorted(Path(path).glob("frame_*.pgm")):
        frame_id = int(f.stem.split("_")[1])
        masks[frame_id] = dio.read_mask_pgm(f)
    if not masks:
        raise DarktrackError(f"no frame_*.pgm masks in {path}")
    return masks


def cmd_ho3(args) -> int:
    masks = _read_masks_dir(args.masks)
    tracks = dio.read_tracks_csv(args.tracks)
    lm_map = build_landmark_map(masks, tracks, args.margin, args.ratio)
    dio.write_landmarks(lm_map, args.out)
    total = sum(len(v) for v in lm_map.frames.values())
    print(f"extracted {total} landmarks over {len(lm_map.frames)} frames")
    return 0


def cmd_loopclose(args) -> int:
    lm_map = dio.read_landmarks(args.landmarks)
    gt = dio.read_loop_gt(args.gt) if args.gt else None
    params = RansacParams(
        iterations=args.iterations,
        inlier_tol=args.inlier_tol,
        min_inliers=args.min_inliers,
        seed=args.seed,
        max_scale=args.max_scale,
        gate_radius=args.gate_radius,
    )
    if gt:
        queries = [q for q in sorted(gt) if q in lm_map.frames]
    else:
        queries = [
            f for f in lm_map.frame_ids()
            if any(p <= f - args.exclusion for p in lm_map.frame_ids())
        ]
    queries = queries[:: args.query_step]
    rankings = [
        rank_past_frames(lm_map, q, args.exclusion, params, args.threads)
        for q in queries
    ]
    lines = []
    for ranking in rankings:
        for rank, (fid, count) in enumerate(ranking.candidates[: args.k], 1):
            lines.append(f"{ranking.query_frame} {rank} {fid} {count}")
    if gt:
        acc = topk_accuracy(rankings, gt, args.k, args.tol)
        lines.append(f"top{args.k}_accuracy {acc:.4f}")
    text = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)
    if args.plot:
        from .plotting import save_ranking_figure

        save_ranking_figure(rankings, gt, args.k, args.plot)
    return 0


def _frame_filter(records: list[TrackRecord], spec: str | None):
    if spec is None:
        return records
    lo, hi = spec.split(":")
    lo_i = int(lo) if lo else 1
    hi_i = int(hi) if hi else max((r.frame_id for r in records), default=1)
    return [r for r in records if lo_i <= r.frame_id <= hi_i]


def cmd_evaluate(args) -> int:
    gt = _frame_filter(dio.read_tracks_csv(args.gt), args.frames)
    pred = _frame_filter(dio.read_tracks_csv(args.pred), args.frames)
    report = evaluate(gt, pred, args.iou_thresh)
    from .plotting import metrics_table

    text = metrics_table({"eval": report}) + "\n"
    text += "".join(line + "\n" for line in report.lines())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)
    if args.plot:
        from .plotting import save_metrics_figure

        save_metrics_figure({"eval": report}, args.plot)
    return 0


def cmd_report(args) -> int:
    from .plotting import metrics_table, save_metrics_figure

    reports: dict[str, MetricsReport] = {}
    for spec in args.run:
        try:
            label, gt_path, pred_path = spec.split(":")
        except ValueError:
            raise DarktrackError(f"--run expects LABEL:GT:PRED, got {spec!r}")
        gt = dio.read_tracks_csv(gt_path)
        pred = dio.read_tracks_csv(pred_path)
        reports[label] = evaluate(gt, pred, args.iou_thresh)
    text = metrics_table(reports) + "\n"
    for label, r in reports.items():
        for line in r.lines():
            text += f"{label} {line}\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)
    if args.plot:
        save_metrics_figure(reports, args.plot)
    return 0


def _parse_size(spec: str) -> tuple[int, int]:
    w, h = spec.lower().split("x")
    return int(w), int(h)


def _sim_config(args) -> SimConfig:
    if args.preset == "loop":
        cfg = loop_scene_config(n_frames=args.frames, seed=args.seed)
        return cfg
    schedule = None
    if args.dark_from is not None:
        if args.dark_from <= 1:
            schedule = (BrightnessSpan(1, args.frames, BrightnessLabel.DARK),)
        elif args.dark_from > args.frames:
            schedule = (BrightnessSpan(1, args.frames, BrightnessLabel.BRIGHT),)
        else:
            schedule = (
                BrightnessSpan(1, args.dark_from - 1, BrightnessLabel.BRIGHT),
                BrightnessSpan(args.dark_from, args.frames, BrightnessLabel.DARK),
            )
    kwargs: dict = dict(
        n_persons=args.persons,
        n_frames=args.frames,
        brightness=schedule,
        seed=args.seed,
    )
    if args.perfect:
        perfect = DetectionModel(1.0, 0.99, 0.99, 0.0)
        kwargs.update(rgb_bright=perfect, thermal=perfect, depth_cam=perfect)
        kwargs.update(person_height=(20.0, 26.0))
    return SimConfig(**kwargs)


def cmd_simulate(args) -> int:
    cfg = _sim_config(args)
    data = simulate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dio.write_mot_csv(data.gt, out / "gt.csv")
    dio.write_detections_csv(data.dets_rgb, out / "dets_rgb.csv")
    dio.write_detections_csv(data.dets_t, out / "dets_t.csv")
    dio.write_detections_csv(data.dets_d, out / "dets_d.csv")
    dio.write_brightness(data.labels, out / "brightness.txt")
    masks_dir = out / "masks"
    masks_dir.mkdir(exist_ok=True)
    for fid, mask in data.masks.items():
        dio.write_mask_pgm(mask, masks_dir / f"frame_{fid:06d}.pgm")
    if data.gt_loop is not None:
        dio.write_loop_gt(data.gt_loop, out / "loop_gt.txt")
    (out / "meta.txt").write_text(
        f"width {data.width}\nheight {data.height}\nframes {data.n_frames}\n",
        encoding="utf-8",
    )
    print(f"simulated {data.n_frames} frames into {out}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="darktrack",
        description="Multi-person tracking, cross-modality cooperation, "
                    "occlusion-boundary loop closure, and MOT evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="detections CSV -> tracks CSV")
    p.add_argument("--dets", required=True)
    p.add_argument("--out", required=True)
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("calibrate", help="correspondences -> homography file")
    p.add_argument("--correspondences", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--robust", action="store_true")
    p.add_argument("--ransac-iterations", type=int, default=500)
    p.add_argument("--inlier-threshold", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("pseudo-label",
                       help="teacher tracks + homography -> pseudo-label CSV")
    p.add_argument("--tracks", required=True)
    p.add_argument("--homography", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bounds", required=True, help="student image size, WxH")
    p.add_argument("--min-score", type=float, default=0.0)
    p.set_defaults(func=cmd_pseudo_label)

    p = sub.add_parser("fuse", help="two track CSVs -> fused CSV")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iou-gate", type=float, default=0.5)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("switch",
                       help="two track CSVs + brightness schedule -> switched CSV")
    p.add_argument("--rgb", required=True)
    p.add_argument("--thermal", required=True)
    p.add_argument("--brightness", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iou-gate", type=float, default=0.5)
    p.set_defaults(func=cmd_switch)

    p = sub.add_parser("ho3", help="masks dir + tracks CSV -> landmark file")
    p.add_argument("--masks", required=True)
    p.add_argument("--tracks", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--margin", type=float, default=2.0)
    p.add_argument("--ratio", type=float, default=0.8)
    p.set_defaults(func=cmd_ho3)

    p = sub.add_parser("loopclose",
                       help="landmark file (+ GT map) -> ranking report")
    p.add_argument("--landmarks", required=True)
    p.add_argument("--gt")
    p.add_argument("--out")
    p.add_argument("--exclusion", type=int, default=50)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--inlier-tol", type=float, default=3.0)
    p.add_argument("--min-inliers", type=int, default=4)
    p.add_argument("--max-scale", type=float, default=3.0)
    p.add_argument("--gate-radius", type=float, default=None)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--tol", type=int, default=10)
    p.add_argument("--query-step", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--plot", help="write a ranking figure (PNG)")
    p.set_defaults(func=cmd_loopclose)

    p = sub.add_parser("evaluate", help="GT + pred CSVs -> metrics report")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--iou-thresh", type=float, default=0.5)
    p.add_argument("--frames", help="restrict to frame range LO:HI (inclusive)")
    p.add_argument("--out")
    p.add_argument("--plot", help="write a metrics figure (PNG)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report",
                       help="side-by-side metric table for several runs")
    p.add_argument("--run", action="append", required=True,
                   metavar="LABEL:GT:PRED")
    p.add_argument("--iou-thresh", type=float, default=0.5)
    p.add_argument("--out")
    p.add_argument("--plot", help="write a comparison figure (PNG)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="config -> synthetic dataset on disk")
    p.add_argument("--out", required=True)
    p.add_argument("--preset", choices=["tracking", "loop"], default="tracking")
    p.add_argument("--frames", type=int, default=300)
    p.add_argument("--persons", type=int, default=4)
    p.add_argument("--dark-from", type=int, default=None,
                   help="first dark frame (before: bright)")
    p.add_argument("--perfect", action="store_true",
                   help="noise-free detections in every modality")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (DarktrackError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
