import numpy as np
import pytest

from darktrack.calibration import Homography
from darktrack.cooperative import (
    BrightnessLabel,
    FrameStats,
    IdPairTable,
    classify_brightness,
    export_pseudo_labels,
    fuse_frame,
    switch_frame,
)
from darktrack.geometry import BBox, iou
from darktrack.tracker import TrackRecord


def rec(frame, pid, left, top=10, w=10, h=20, score=0.9):
    return TrackRecord(frame, pid, BBox(left, top, w, h), score)


def translation(tx, ty):
    return Homography(np.array([[1, 0, tx], [0, 1, ty], [0, 0, 1]], float))


class TestPseudoLabels:
    def test_identity_in_bounds(self):
        r = rec(1, 3, 10)
        out = export_pseudo_labels([r], Homography.identity(), (100, 100))
        assert out.records == [r]
        assert out.dropped == 0

    def test_outside_bounds_dropped(self):
        r = rec(1, 3, 200)
        out = export_pseudo_labels([r], Homography.identity(), (100, 100))
        assert out.records == []
        assert out.dropped == 1

    def test_min_score_skips_quietly(self):
        out = export_pseudo_labels(
            [rec(1, 1, 10, score=0.2)], Homography.identity(), (100, 100),
            min_score=0.5,
        )
        assert out.records == [] and out.dropped == 0

    def test_translation_shifts_every_record(self):
        records = [rec(f, 1, 10 + f, score=0.8) for f in range(1, 101)]
        out = export_pseudo_labels(records, translation(8, 0), (400, 100))
        assert len(out.records) == 100
        for src, dst in zip(records, out.records):
            assert dst.bbox.left == pytest.approx(src.bbox.left + 8, abs=1e-9)
            assert dst.bbox.top == pytest.approx(src.bbox.top, abs=1e-9)
            assert dst.person_id == src.person_id
            assert dst.score == src.score

    def test_identity_on_large_bounds_is_identity(self):
        records = [rec(1, i, 10 * i, score=0.5 + 0.04 * i) for i in range(1, 9)]
        out = export_pseudo_labels(records, Homography.identity(), (1e9, 1e9),
                                   min_score=0.6)
        assert out.records == [r for r in records if r.score >= 0.6]

    def test_partial_clamp(self):
        r = rec(1, 1, -5, top=-5, w=10, h=10)
        out = export_pseudo_labels([r], Homography.identity(), (100, 100))
        b = out.records[0].bbox
        assert (b.left, b.top, b.width, b.height) == (0, 0, 5, 5)


class TestFuse:
    def test_identical_streams_tie_goes_to_b(self):
        a = [rec(1, 1, 10, score=0.7)]
        b = [rec(1, 5, 10, score=0.7)]
        out = fuse_frame(a, b, IdPairTable())
        assert len(out) == 1
        assert out[0].score == 0.7
        assert out[0].bbox == b[0].bbox

    def test_higher_score_wins(self):
        a = [rec(1, 1, 10, score=0.9)]
        b = [rec(1, 5, 11, score=0.4)]
        out = fuse_frame(a, b, IdPairTable())
        assert out[0].bbox == a[0].bbox
        assert out[0].score == 0.9

    def test_unmatched_pass_through(self):
        a = [rec(1, 1, 10, score=0.9), rec(1, 2, 200, score=0.8)]
        b = [rec(1, 5, 10, score=0.4)]
        out = fuse_frame(a, b, IdPairTable())
        assert len(out) == 2
        lefts = sorted(r.bbox.left for r in out)
        assert lefts == [10, 200]

    def test_emitted_score_is_max(self):
        a = [rec(1, 1, 10, score=0.6)]
        b = [rec(1, 9, 10, score=0.8)]
        out = fuse_frame(a, b, IdPairTable())
        assert out[0].score == 0.8

    def test_no_duplicates_from_matched_pair(self):
        a = [rec(1, 1, 10, score=0.9)]
        b = [rec(1, 5, 10.5, score=0.8)]
        out = fuse_frame(a, b, IdPairTable())
        assert len(out) == 1
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                assert iou(out[i].bbox, out[j].bbox) <= 0.9

    def test_persistent_ids_across_frames(self):
        table = IdPairTable()
        out1 = fuse_frame([rec(1, 1, 10, score=0.9)],
                          [rec(1, 7, 10, score=0.5)], table)
        out2 = fuse_frame([rec(2, 1, 12, score=0.4)],
                          [rec(2, 7, 12, score=0.8)], table)
        assert out1[0].person_id == out2[0].person_id


class TestBrightness:
    def test_far_above_threshold(self):
        s = FrameStats(1, 200)
        assert classify_brightness(s, 60, 5, BrightnessLabel.DARK) is BrightnessLabel.BRIGHT

    def test_dark(self):
        assert classify_brightness(FrameStats(1, 10), 60) is BrightnessLabel.DARK

    def test_hysteresis_band_holds_previous(self):
        s = FrameStats(1, 62)
        assert classify_brightness(s, 60, 5, BrightnessLabel.DARK) is BrightnessLabel.DARK
        assert classify_brightness(s, 60, 5, BrightnessLabel.BRIGHT) is BrightnessLabel.BRIGHT

    def test_no_flapping_on_constant_plus_epsilon(self):
        label = BrightnessLabel.DARK
        flips = 0
        rng = np.random.default_rng(0)
        for f in range(200):
            s = FrameStats(f + 1, 60.0 + rng.uniform(-1, 1))
            new = classify_brightness(s, 60, 5, label)
            flips += new is not label
            label = new
        assert flips == 0


class TestSwitch:
    def test_bright_returns_rgb(self):
        rgb = [rec(1, 1, 10, score=0.9)]
        t = [rec(1, 4, 10, score=0.6)]
        out = switch_frame(rgb, t, BrightnessLabel.BRIGHT, IdPairTable())
        assert [r.bbox for r in out] == [rgb[0].bbox]
        assert [r.score for r in out] == [0.9]

    def test_dark_returns_thermal(self):
        rgb = [rec(1, 1, 10, score=0.9)]
        t = [rec(1, 4, 11, score=0.6)]
        out = switch_frame(rgb, t, BrightnessLabel.DARK, IdPairTable())
        assert [r.bbox for r in out] == [t[0].bbox]

    def test_identity_survives_transition(self):
        table = IdPairTable()
        ids = []
        for f in range(1, 11):
            label = BrightnessLabel.BRIGHT if f <= 5 else BrightnessLabel.DARK
            rgb = [rec(f, 1, 10 + f, score=0.9)]
            t = [rec(f, 42, 10 + f, score=0.7)]
            out = switch_frame(rgb, t, label, table)
            ids.append(out[0].person_id)
        assert len(set(ids)) == 1

    def test_exhaustive_and_exclusive(self):
        rgb = [rec(1, 1, 10), rec(1, 2, 50)]
        t = [rec(1, 7, 10.2), rec(1, 8, 120)]
        for label, source in ((BrightnessLabel.BRIGHT, rgb),
                              (BrightnessLabel.DARK, t)):
            out = switch_frame(rgb, t, label, IdPairTable())
            assert sorted(r.bbox.left for r in out) == sorted(
                r.bbox.left for r in source
            )
