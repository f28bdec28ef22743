"""Model-agnostic detection evaluation.

IoU/GIoU box geometry, greedy confidence-descending matching at an IoU
threshold, per-class precision/recall/F1 at an operating confidence, and
all-point interpolated AP / mAP@0.5 swept over every detection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import Annotation, BBox, CLASS_LABELS, NUM_CLASSES


class InputError(ValueError):
    """Detections reference unknown frames or are malformed."""


@dataclass(frozen=True)
class Detection:
    frame_id: str
    bbox: BBox
    class_id: int
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise InputError(f"confidence must be in [0,1], got {self.confidence}")
        if not 0 <= self.class_id < NUM_CLASSES:
            raise InputError(f"class_id out of range: {self.class_id}")


@dataclass
class ClassCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 for disjoint boxes."""
    ix = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    iy = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def giou(a: BBox, b: BBox) -> float:
    """Generalized IoU: IoU minus the enclosing-box penalty, in (-1, 1]."""
    enclose = (max(a.xmax, b.xmax) - min(a.xmin, b.xmin)) * (
        max(a.ymax, b.ymax) - min(a.ymin, b.ymin)
    )
    ix = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    iy = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    inter = ix * iy if (ix > 0 and iy > 0) else 0.0
    union = a.area + b.area - inter
    return inter / union - (enclose - union) / enclose


def _sorted_dets(dets: list[Detection]) -> list[Detection]:
    # ties break by lower frame_id, then input order
    order = sorted(
        range(len(dets)),
        key=lambda i: (-dets[i].confidence, dets[i].frame_id, i),
    )
    return [dets[i] for i in order]


def match_detections(
    dets: list[Detection],
    gts: list[tuple[str, Annotation]],
    iou_threshold: float = 0.5,
) -> tuple[dict[int, ClassCounts], list[tuple[Detection, bool]]]:
    """Greedy one-to-one matching per class.

    Detections are visited in descending confidence (ties: lower frame_id,
    then input order); each claims the unmatched same-frame same-class
    ground truth of highest IoU if that IoU >= threshold.

    Returns per-class counts and the per-detection TP/FP flags in visit
    order.
    """
    counts = {c: ClassCounts() for c in range(NUM_CLASSES)}
    gt_by_key: dict[tuple[str, int], list[Annotation]] = {}
    for frame_id, ann in gts:
        gt_by_key.setdefault((frame_id, ann.class_id), []).append(ann)
        counts[ann.class_id].fn += 1  # converted to tp on match

    matched: dict[tuple[str, int], list[bool]] = {
        k: [False] * len(v) for k, v in gt_by_key.items()
    }
    flags: list[tuple[Detection, bool]] = []
    for det in _sorted_dets(dets):
        key = (det.frame_id, det.class_id)
        candidates = gt_by_key.get(key, [])
        best_i, best_iou = -1, 0.0
        for i, ann in enumerate(candidates):
            if matched[key][i]:
                continue
            v = iou(det.bbox, ann.bbox)
            if v > best_iou:
                best_i, best_iou = i, v
        if best_i >= 0 and best_iou >= iou_threshold:
            matched[key][best_i] = True
            counts[det.class_id].tp += 1
            counts[det.class_id].fn -= 1
            flags.append((det, True))
        else:
            counts[det.class_id].fp += 1
            flags.append((det, False))
    return counts, flags


def precision(c: ClassCounts) -> tuple[float, bool]:
    """TP/(TP+FP); (0.0, True) flags the undefined zero-denominator case."""
    if c.tp + c.fp == 0:
        return 0.0, True
    return c.tp / (c.tp + c.fp), False


def recall(c: ClassCounts) -> tuple[float, bool]:
    """TP/(TP+FN); (0.0, True) flags the undefined zero-denominator case."""
    if c.tp + c.fn == 0:
        return 0.0, True
    return c.tp / (c.tp + c.fn), False


def f1(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 when both vanish."""
    if p + r == 0:
        return 0.0
    return 2.0 * p * r / (p + r)


@dataclass(frozen=True)
class PrCurve:
    """(recall, precision) after each detection, descending confidence."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        last = 0.0
        for r, p in self.points:
            if not (0.0 <= r <= 1.0 and 0.0 <= p <= 1.0):
                raise InputError(f"curve point out of range: ({r}, {p})")
            if r < last - 1e-12:
                raise InputError("recall must be non-decreasing along the curve")
            last = r


def pr_curve(tp_flags: list[bool], gt_count: int) -> PrCurve:
    """Sweep TP/FP flags (already in descending-confidence order)."""
    if gt_count < 1:
        raise InputError("pr_curve requires at least one ground truth")
    points = []
    tp_so_far = 0
    for k, is_tp in enumerate(tp_flags, start=1):
        if is_tp:
            tp_so_far += 1
        points.append((tp_so_far / gt_count, tp_so_far / k))
    return PrCurve(tuple(points))


def interpolated_ap(curve: PrCurve) -> float:
    """All-point interpolated AP.

    Each precision is replaced by the max precision at equal-or-higher
    index, then summed against the recall increments (first increment
    measured from recall 0).
    """
    pts = curve.points
    if not pts:
        return 0.0
    n = len(pts)
    p_interp = [0.0] * n
    running = 0.0
    for i in range(n - 1, -1, -1):
        running = max(running, pts[i][1])
        p_interp[i] = running
    ap = 0.0
    prev_r = 0.0
    for i in range(n):
        r = pts[i][0]
        ap += p_interp[i] * (r - prev_r)
        prev_r = r
    return ap


def map_50(per_class_aps: dict[int, float]) -> float:
    """Arithmetic mean of AP over classes present in ground truth."""
    if not per_class_aps:
        raise InputError("mAP requires at least one class with ground truth")
    return sum(per_class_aps.values()) / len(per_class_aps)


@dataclass
class ClassMetrics:
    label: str
    counts: ClassCounts
    precision: float
    precision_undefined: bool
    recall: float
    recall_undefined: bool
    f1: float
    ap: float | None  # None when the class has no ground truth
    curve: PrCurve | None


@dataclass
class MetricReport:
    iou_threshold: float
    confidence_threshold: float
    per_class: dict[int, ClassMetrics]
    map_50: float
    seconds_per_image: float | None = None
    model_name: str | None = None

    def to_dict(self) -> dict:
        d = {
            "iou_threshold": self.iou_threshold,
            "confidence_threshold": self.confidence_threshold,
            "map_50": self.map_50,
            "classes": {},
        }
        if self.seconds_per_image is not None:
            d["seconds_per_image"] = self.seconds_per_image
        if self.model_name is not None:
            d["model_name"] = self.model_name
        for cid, m in sorted(self.per_class.items()):
            d["classes"][m.label] = {
                "class_id": cid,
                "tp": m.counts.tp,
                "fp": m.counts.fp,
                "fn": m.counts.fn,
                "precision": m.precision,
                "precision_undefined": m.precision_undefined,
                "recall": m.recall,
                "recall_undefined": m.recall_undefined,
                "f1": m.f1,
                "ap": m.ap,
                "pr_curve": list(m.curve.points) if m.curve else None,
            }
        return d

    def render_text(self) -> str:
        lines = [
            f"IoU threshold {self.iou_threshold:.2f}, "
            f"operating confidence {self.confidence_threshold:.2f}",
            f"{'class':<16}{'TP':>6}{'FP':>6}{'FN':>6}"
            f"{'Prec':>8}{'Rec':>8}{'F1':>8}{'AP':>8}",
        ]
        for cid, m in sorted(self.per_class.items()):
            ap_txt = f"{m.ap:.3f}" if m.ap is not None else "-"
            prec_txt = f"{m.precision:.3f}" + ("*" if m.precision_undefined else "")
            rec_txt = f"{m.recall:.3f}" + ("*" if m.recall_undefined else "")
            lines.append(
                f"{m.label:<16}{m.counts.tp:>6}{m.counts.fp:>6}{m.counts.fn:>6}"
                f"{prec_txt:>8}{rec_txt:>8}{m.f1:>8.3f}{ap_txt:>8}"
            )
        lines.append(f"mAP@{self.iou_threshold:g} = {self.map_50:.3f}")
        lines.append("(* = undefined, zero denominator)")
        return "\n".join(lines)


def evaluate(
    gts: list[tuple[str, Annotation]],
    dets: list[Detection],
    known_frames: set[str],
    iou_threshold: float = 0.5,
    confidence_threshold: float = 0.25,
) -> MetricReport:
    """Full evaluation: threshold-free AP sweep + thresholded P/R/F1."""
    unknown = sorted({d.frame_id for d in dets} - known_frames)
    if unknown:
        raise InputError(f"detections reference unknown frames: {unknown}")

    gt_classes = sorted({ann.class_id for _, ann in gts})
    gt_count = {c: sum(1 for _, a in gts if a.class_id == c) for c in gt_classes}

    # AP: sweep over every detection regardless of confidence
    _, sweep_flags = match_detections(dets, gts, iou_threshold)
    per_class_aps: dict[int, float] = {}
    curves: dict[int, PrCurve] = {}
    for c in gt_classes:
        flags_c = [tp for det, tp in sweep_flags if det.class_id == c]
        curve = pr_curve(flags_c, gt_count[c])
        curves[c] = curve
        per_class_aps[c] = interpolated_ap(curve)

    # operating point: P/R/F1 at the confidence threshold
    op_dets = [d for d in dets if d.confidence >= confidence_threshold]
    op_counts, _ = match_detections(op_dets, gts, iou_threshold)

    det_classes = sorted({d.class_id for d in dets})
    per_class: dict[int, ClassMetrics] = {}
    for c in sorted(set(gt_classes) | set(det_classes)):
        counts = op_counts[c]
        p, p_undef = precision(counts)
        r, r_undef = recall(counts)
        per_class[c] = ClassMetrics(
            label=CLASS_LABELS[c],
            counts=counts,
            precision=p,
            precision_undefined=p_undef,
            recall=r,
            recall_undefined=r_undef,
            f1=f1(p, r),
            ap=per_class_aps.get(c),
            curve=curves.get(c),
        )
    return MetricReport(
        iou_threshold=iou_threshold,
        confidence_threshold=confidence_threshold,
        per_class=per_class,
        map_50=map_50(per_class_aps),
    )


def parse_detections_text(text: str) -> list[Detection]:
    """Parse the detections exchange format:
    `frame_id class_id confidence xmin ymin xmax ymax` per line."""
    dets = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 7:
            raise InputError(f"line {lineno}: expected 7 fields, got {len(tokens)}")
        try:
            frame_id = tokens[0]
            class_id = int(tokens[1])
            confidence = float(tokens[2])
            coords = [float(t) for t in tokens[3:]]
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from exc
        dets.append(
            Detection(frame_id, BBox(*coords), class_id, confidence)
        )
    return dets


def format_detections_text(dets: list[Detection]) -> str:
    lines = [
        f"{d.frame_id} {d.class_id} {d.confidence:.6f} "
        f"{d.bbox.xmin:.6f} {d.bbox.ymin:.6f} {d.bbox.xmax:.6f} {d.bbox.ymax:.6f}"
        for d in dets
    ]
    return "\n".join(lines) + ("\n" if lines else "")
