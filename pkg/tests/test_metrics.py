import numpy as np
import pytest

from oracles import brute_force_evaluate
from weldvision.core import Annotation, BBox
from weldvision.metrics import (
    ClassCounts,
    Detection,
    InputError,
    PrCurve,
    evaluate,
    f1,
    format_detections_text,
    giou,
    interpolated_ap,
    iou,
    map_50,
    match_detections,
    parse_detections_text,
    pr_curve,
    precision,
    recall,
)


class TestIou:
    def test_identical(self):
        b = BBox(3, 4, 10, 12)
        assert iou(b, b) == pytest.approx(1.0)

    def test_half_shift(self):
        assert iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)) == pytest.approx(1 / 3)

    def test_disjoint(self):
        assert iou(BBox(0, 0, 1, 1), BBox(2, 2, 3, 3)) == 0.0


class TestGiou:
    def test_identical(self):
        b = BBox(0, 0, 4, 4)
        assert giou(b, b) == pytest.approx(1.0)

    def test_adjacent_gap(self):
        assert giou(BBox(0, 0, 1, 1), BBox(2, 0, 3, 1)) == pytest.approx(-1 / 3)

    def test_monotone_toward_minus_one(self):
        vals = [
            giou(BBox(0, 0, 1, 1), BBox(d, 0, d + 1, 1)) for d in (10, 100, 1000)
        ]
        assert vals[0] > vals[1] > vals[2] > -1.0


class TestMatchDetections:
    def gt(self, *boxes):
        return [("f", Annotation(b, 0)) for b in boxes]

    def test_single_match(self):
        dets = [Detection("f", BBox(0, 0, 10, 6), 0, 0.9)]  # IoU 0.6
        counts, _ = match_detections(dets, self.gt(BBox(0, 0, 10, 10)))
        assert (counts[0].tp, counts[0].fp, counts[0].fn) == (1, 0, 0)

    def test_greedy_one_to_one(self):
        dets = [
            Detection("f", BBox(0, 0, 10, 9), 0, 0.9),
            Detection("f", BBox(0, 0, 10, 8), 0, 0.8),
        ]
        counts, flags = match_detections(dets, self.gt(BBox(0, 0, 10, 10)))
        assert (counts[0].tp, counts[0].fp, counts[0].fn) == (1, 1, 0)
        assert [tp for _, tp in flags] == [True, False]

    def test_below_threshold(self):
        dets = [Detection("f", BBox(0, 0, 10, 4), 0, 0.9)]  # IoU 0.4
        counts, _ = match_detections(dets, self.gt(BBox(0, 0, 10, 10)))
        assert (counts[0].tp, counts[0].fp, counts[0].fn) == (0, 1, 1)

    def test_class_isolation(self):
        dets = [Detection("f", BBox(0, 0, 10, 10), 1, 0.9)]
        counts, _ = match_detections(dets, self.gt(BBox(0, 0, 10, 10)))
        assert counts[0].fn == 1 and counts[1].fp == 1


class TestPrecisionRecallF1:
    def test_precision(self):
        assert precision(ClassCounts(tp=1, fp=0)) == (1.0, False)
        assert precision(ClassCounts(tp=1, fp=3)) == (0.25, False)
        assert precision(ClassCounts()) == (0.0, True)

    def test_recall(self):
        assert recall(ClassCounts(tp=9, fn=1)) == (0.9, False)
        assert recall(ClassCounts(fn=5)) == (0.0, False)
        assert recall(ClassCounts()) == (0.0, True)

    def test_f1_reference_values(self):
        # exact harmonic mean is 0.66184; the reference 0.661 is that value
        # truncated (not rounded) to three decimals
        v = f1(0.505, 0.96)
        assert v == pytest.approx(0.6618430034129693, abs=1e-12)
        assert int(v * 1000) / 1000 == 0.661
        assert round(f1(0.99, 0.99), 2) == 0.99
        assert f1(1.0, 0.0) == 0.0


class TestPrCurve:
    def test_single_tp(self):
        assert pr_curve([True], 1).points == ((1.0, 1.0),)

    def test_mixed_sequence(self):
        pts = pr_curve([True, False, True], 2).points
        assert pts == ((0.5, 1.0), (0.5, 0.5), (1.0, 2 / 3))

    def test_recall_monotone_over_random_sequences(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            flags = [bool(v) for v in rng.integers(0, 2, n)]
            gt = max(1, sum(flags))
            pts = pr_curve(flags, gt).points
            assert all(b[0] >= a[0] for a, b in zip(pts, pts[1:]))

    def test_decreasing_recall_rejected(self):
        with pytest.raises(InputError):
            PrCurve(((0.5, 1.0), (0.4, 1.0)))


class TestInterpolatedAp:
    def test_perfect(self):
        assert interpolated_ap(PrCurve(((1.0, 1.0),))) == pytest.approx(1.0)

    def test_hand_case(self):
        curve = PrCurve(((0.5, 1.0), (0.5, 0.5), (1.0, 2 / 3)))
        assert interpolated_ap(curve) == pytest.approx(5 / 6, abs=1e-12)

    def test_flat_precision(self):
        curve = PrCurve(tuple((r, 0.7) for r in (0.25, 0.5, 0.75, 1.0)))
        assert interpolated_ap(curve) == pytest.approx(0.7)


class TestMap50:
    def test_table_aps(self):
        aps = [0.951, 0.995, 0.992, 0.995, 0.995, 0.995, 0.978, 0.995]
        assert map_50(dict(enumerate(aps))) == pytest.approx(0.987, abs=0.0005)

    def test_single_class(self):
        assert map_50({2: 0.7}) == 0.7

    def test_all_perfect(self):
        assert map_50({c: 1.0 for c in range(8)}) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            map_50({})


def _random_instance(seed):
    rng = np.random.default_rng(seed)
    gts, dets = [], []
    for f in range(int(rng.integers(1, 4))):
        frame = f"fr{f}"
        for _ in range(int(rng.integers(0, 6))):
            x0, y0 = rng.uniform(0, 80, 2)
            b = BBox(x0, y0, x0 + rng.uniform(2, 20), y0 + rng.uniform(2, 20))
            gts.append((frame, Annotation(b, int(rng.integers(0, 4)))))
        for _ in range(int(rng.integers(0, 8))):
            x0, y0 = rng.uniform(0, 80, 2)
            b = BBox(x0, y0, x0 + rng.uniform(2, 20), y0 + rng.uniform(2, 20))
            dets.append(
                Detection(frame, b, int(rng.integers(0, 4)), round(float(rng.uniform(0.05, 1.0)), 6))
            )
    return gts, dets


class TestEvaluate:
    def _frames(self, gts, dets):
        return {f for f, _ in gts} | {d.frame_id for d in dets}

    def test_perfect_detector(self):
        gts = [("f", Annotation(BBox(0, 0, 10, 10), c)) for c in range(3)]
        dets = [Detection("f", a.bbox, a.class_id, 1.0) for _, a in gts]
        report = evaluate(gts, dets, known_frames={"f"})
        assert report.map_50 == pytest.approx(1.0)
        for m in report.per_class.values():
            assert m.precision == m.recall == m.f1 == m.ap == 1.0

    def test_empty_detections(self):
        gts = [("f", Annotation(BBox(0, 0, 10, 10), 0))]
        report = evaluate(gts, [], known_frames={"f"})
        m = report.per_class[0]
        assert m.precision_undefined and m.recall == 0.0
        assert report.map_50 == 0.0

    def test_unknown_frame_rejected(self):
        with pytest.raises(InputError, match="unknown frames"):
            evaluate(
                [("f", Annotation(BBox(0, 0, 1, 1), 0))],
                [Detection("g", BBox(0, 0, 1, 1), 0, 0.5)],
                known_frames={"f"},
            )

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_brute_force(self, seed):
        gts, dets = _random_instance(seed)
        if not gts:
            pytest.skip("empty instance")
        report = evaluate(gts, dets, known_frames=self._frames(gts, dets))
        oracle = brute_force_evaluate(
            [(f, a.class_id, (a.bbox.xmin, a.bbox.ymin, a.bbox.xmax, a.bbox.ymax)) for f, a in gts],
            [
                (d.frame_id, d.class_id, d.confidence,
                 (d.bbox.xmin, d.bbox.ymin, d.bbox.xmax, d.bbox.ymax))
                for d in dets
            ],
        )
        assert report.map_50 == pytest.approx(oracle["map"], abs=1e-9)
        for cid, m in report.per_class.items():
            o = oracle[cid]
            assert (m.counts.tp, m.counts.fp, m.counts.fn) == (o["tp"], o["fp"], o["fn"])
            assert m.precision == pytest.approx(o["precision"], abs=1e-9)
            assert m.recall == pytest.approx(o["recall"], abs=1e-9)
            assert m.f1 == pytest.approx(o["f1"], abs=1e-9)
            if m.ap is not None:
                assert m.ap == pytest.approx(o["ap"], abs=1e-9)


class TestDetectionsText:
    def test_round_trip(self):
        dets = [
            Detection("f1", BBox(1.5, 2.25, 10.0, 20.0), 3, 0.875),
            Detection("f2", BBox(0.0, 0.0, 5.0, 5.0), 0, 1.0),
        ]
        assert parse_detections_text(format_detections_text(dets)) == dets

    def test_comments_and_blanks(self):
        assert parse_detections_text("# header\n\n") == []

    def test_bad_field_count(self):
        with pytest.raises(InputError, match="line 1"):
            parse_detections_text("f1 0 0.5 1 2 3\n")

    def test_bad_confidence(self):
        with pytest.raises(InputError):
            parse_detections_text("f1 0 1.5 0 0 5 5\n")
