"""Bounding-box-aware dataset augmentation.

Eight single-image methods (brightness, rotation, cutout, gaussian noise,
horizontal flip, intensity jitter, resize, random crop) plus the 4-image
Mosaic. Geometric kinds move boxes consistently with pixels; photometric
kinds never touch them. Everything is a pure function of (inputs, seed).
"""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field, replace

import cv2
import numpy as np

from .core import Annotation, BBox, GrayImage, quantize_u8
from .ingest import letterbox
from .manifest import DatasetManifest, ManifestRecord


class AugmentKind(enum.Enum):
    BRIGHTNESS = "brightness"
    ROTATION = "rotation"
    CUTOUT = "cutout"
    GAUSSIAN_NOISE = "gaussian_noise"
    HFLIP = "hflip"
    COLOR_JITTER = "color_jitter"
    RESIZE = "resize"
    RANDOM_CROP = "random_crop"


KIND_CYCLE = tuple(AugmentKind)

PHOTOMETRIC_KINDS = frozenset(
    {AugmentKind.BRIGHTNESS, AugmentKind.GAUSSIAN_NOISE, AugmentKind.COLOR_JITTER,
     AugmentKind.CUTOUT}
)


@dataclass(frozen=True)
class AugmentConfig:
    """Sampling ranges for the eight methods (conservative defaults)."""

    brightness_delta: float = 0.25        # multiplicative, 1 +- delta
    rotation_max_deg: float = 15.0
    cutout_area: tuple[float, float] = (0.05, 0.20)
    noise_sigma: tuple[float, float] = (1.0, 8.0)
    contrast: tuple[float, float] = (0.8, 1.2)
    sharpness: tuple[float, float] = (0.0, 0.5)
    resize_scale: tuple[float, float] = (0.75, 1.25)
    crop_keep_area: tuple[float, float] = (0.70, 0.95)
    drop_area_fraction: float = 0.25      # truncation threshold for box drop


DEFAULT_CONFIG = AugmentConfig()


@dataclass(frozen=True)
class AugmentRecord:
    parent_id: str
    variant_index: int
    kind: AugmentKind | None  # None for an included-original copy
    params: dict
    seed: int

    def to_dict(self) -> dict:
        return {
            "parent_id": self.parent_id,
            "variant_index": self.variant_index,
            "kind": self.kind.value if self.kind else "original",
            "params": self.params,
            "seed": self.seed,
        }


def _enclose(points: np.ndarray) -> tuple[float, float, float, float]:
    return (
        float(points[:, 0].min()),
        float(points[:, 1].min()),
        float(points[:, 0].max()),
        float(points[:, 1].max()),
    )


def transform_box_corners(box: BBox, matrix: np.ndarray) -> BBox:
    """Map all four corners through a 2x3 affine and re-enclose."""
    corners = np.array(
        [
            [box.xmin, box.ymin, 1.0],
            [box.xmax, box.ymin, 1.0],
            [box.xmin, box.ymax, 1.0],
            [box.xmax, box.ymax, 1.0],
        ]
    )
    mapped = corners @ matrix.T
    return BBox(*_enclose(mapped))


def _finalize_boxes(
    anns: list[Annotation],
    boxes: list[BBox],
    out_w: int,
    out_h: int,
    drop: bool,
    drop_fraction: float,
) -> list[Annotation]:
    """Clip transformed boxes to the frame; drop heavily truncated ones.

    A box is dropped when its clipped area falls below drop_fraction of its
    untruncated (pre-clip) transformed area. With drop disabled, boxes that
    left the frame are snapped to a minimal sliver at the nearest border so
    label counts stay exact.
    """
    out: list[Annotation] = []
    for ann, box in zip(anns, boxes):
        clipped = box.clip_to(out_w, out_h)
        if clipped is not None and (
            not drop or clipped.area >= drop_fraction * box.area
        ):
            out.append(Annotation(clipped, ann.class_id))
        elif not drop:
            cx = min(max(box.center[0], 1.0), out_w - 1.0)
            cy = min(max(box.center[1], 1.0), out_h - 1.0)
            out.append(Annotation(BBox(cx - 1.0, cy - 1.0, cx + 1.0, cy + 1.0), ann.class_id))
    return out


def rotation_matrix(width: int, height: int, angle_deg: float) -> np.ndarray:
    """Affine for rotating continuous box coordinates about the image center
    (matches warpAffine's pixel-center convention)."""
    pix = cv2.getRotationMatrix2D(((width - 1) / 2.0, (height - 1) / 2.0), angle_deg, 1.0)
    # continuous coords sit half a pixel off the pixel-center grid
    shift_in = np.array([[1.0, 0.0, -0.5], [0.0, 1.0, -0.5], [0.0, 0.0, 1.0]])
    m3 = np.vstack([pix, [0.0, 0.0, 1.0]]) @ shift_in
    m3[0, 2] += 0.5
    m3[1, 2] += 0.5
    return m3[:2]


def augment_one(
    image: GrayImage,
    anns: list[Annotation],
    kind: AugmentKind,
    seed: int,
    config: AugmentConfig = DEFAULT_CONFIG,
    drop: bool = True,
) -> tuple[GrayImage, list[Annotation], dict]:
    """Apply one augmentation; returns (image, annotations, sampled params).

    Replaying the same (kind, seed, config) on the same input reproduces the
    output byte-exactly.
    """
    rng = np.random.default_rng(seed)
    w, h = image.width, image.height
    f = image.to_float()
    params: dict = {}
    drop_frac = config.drop_area_fraction

    if kind is AugmentKind.BRIGHTNESS:
        factor = float(1.0 + rng.uniform(-config.brightness_delta, config.brightness_delta))
        params["factor"] = factor
        return GrayImage(quantize_u8(f * factor)), list(anns), params

    if kind is AugmentKind.GAUSSIAN_NOISE:
        sigma = float(rng.uniform(*config.noise_sigma))
        params["sigma"] = sigma
        noisy = f + rng.normal(0.0, sigma, f.shape)
        return GrayImage(quantize_u8(noisy)), list(anns), params

    if kind is AugmentKind.COLOR_JITTER:
        contrast = float(rng.uniform(*config.contrast))
        sharpness = float(rng.uniform(*config.sharpness))
        params.update(contrast=contrast, sharpness=sharpness)
        mean = float(f.mean())
        out = mean + contrast * (f - mean)
        blurred = cv2.GaussianBlur(out, (5, 5), 1.0)
        out = out + sharpness * (out - blurred)
        return GrayImage(quantize_u8(out)), list(anns), params

    if kind is AugmentKind.CUTOUT:
        area = float(rng.uniform(*config.cutout_area)) * w * h
        aspect = float(rng.uniform(0.5, 2.0))
        cw = min(w, max(1, round(math.sqrt(area * aspect))))
        ch = min(h, max(1, round(math.sqrt(area / aspect))))
        x0 = int(rng.integers(0, w - cw + 1))
        y0 = int(rng.integers(0, h - ch + 1))
        params.update(x0=x0, y0=y0, width=cw, height=ch)
        out = f.copy()
        out[y0:y0 + ch, x0:x0 + cw] = 0.0
        return GrayImage(quantize_u8(out)), list(anns), params

    if kind is AugmentKind.HFLIP:
        flipped = np.ascontiguousarray(np.fliplr(image.pixels))
        boxes = [BBox(w - a.bbox.xmax, a.bbox.ymin, w - a.bbox.xmin, a.bbox.ymax) for a in anns]
        return (
            GrayImage(flipped),
            _finalize_boxes(list(anns), boxes, w, h, drop, drop_frac),
            params,
        )

    if kind is AugmentKind.ROTATION:
        angle = float(rng.uniform(-config.rotation_max_deg, config.rotation_max_deg))
        params["angle_deg"] = angle
        pix_m = cv2.getRotationMatrix2D(((w - 1) / 2.0, (h - 1) / 2.0), angle, 1.0)
        rotated = cv2.warpAffine(
            image.pixels, pix_m, (w, h),
            flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0,
        )
        box_m = rotation_matrix(w, h, angle)
        boxes = [transform_box_corners(a.bbox, box_m) for a in anns]
        return (
            GrayImage(rotated),
            _finalize_boxes(list(anns), boxes, w, h, drop, drop_frac),
            params,
        )

    if kind is AugmentKind.RESIZE:
        scale = float(rng.uniform(*config.resize_scale))
        out_w = max(1, round(w * scale))
        out_h = max(1, round(h * scale))
        params.update(scale=scale, out_width=out_w, out_height=out_h)
        resized = cv2.resize(image.pixels, (out_w, out_h), interpolation=cv2.INTER_LINEAR)
        sx, sy = out_w / w, out_h / h
        m = np.array([[sx, 0.0, 0.0], [0.0, sy, 0.0]])
        boxes = [transform_box_corners(a.bbox, m) for a in anns]
        return (
            GrayImage(resized),
            _finalize_boxes(list(anns), boxes, out_w, out_h, drop, drop_frac),
            params,
        )

    if kind is AugmentKind.RANDOM_CROP:
        keep = float(rng.uniform(*config.crop_keep_area))
        side = math.sqrt(keep)
        cw = max(1, round(w * side))
        ch = max(1, round(h * side))
        x0 = int(rng.integers(0, w - cw + 1))
        y0 = int(rng.integers(0, h - ch + 1))
        params.update(x0=x0, y0=y0, width=cw, height=ch)
        cropped = image.pixels[y0:y0 + ch, x0:x0 + cw].copy()
        m = np.array([[1.0, 0.0, -float(x0)], [0.0, 1.0, -float(y0)]])
        boxes = [transform_box_corners(a.bbox, m) for a in anns]
        return (
            GrayImage(cropped),
            _finalize_boxes(list(anns), boxes, cw, ch, drop, drop_frac),
            params,
        )

    raise ValueError(f"unhandled augmentation kind: {kind}")


def variant_seed(master_seed: int, parent_id: str, variant_index: int) -> int:
    """Stable 64-bit per-variant seed."""
    digest = hashlib.blake2b(
        f"{master_seed}:{parent_id}:{variant_index}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def plan_variants(
    parent_id: str,
    multiplier: int,
    master_seed: int,
    include_original: bool = False,
) -> list[tuple[int, AugmentKind | None, int]]:
    """(variant_index, kind, seed) for each of the multiplier variants.

    Kinds cycle through the eight methods; with include_original the first
    variant is an untouched copy of the parent.
    """
    if multiplier < 1:
        raise ValueError(f"multiplier must be >= 1, got {multiplier}")
    plan = []
    for i in range(1, multiplier + 1):
        if include_original and i == 1:
            kind = None
        else:
            offset = i - 2 if include_original else i - 1
            kind = KIND_CYCLE[offset % len(KIND_CYCLE)]
        plan.append((i, kind, variant_seed(master_seed, parent_id, i)))
    return plan


def expand_dataset(
    manifest: DatasetManifest,
    multiplier: int,
    master_seed: int,
    load_image,
    save_image,
    include_original: bool = False,
    drop: bool = True,
    config: AugmentConfig = DEFAULT_CONFIG,
) -> tuple[DatasetManifest, list[AugmentRecord]]:
    """Expand every record into `multiplier` augmented variants.

    load_image(record) -> GrayImage; save_image(frame_id, GrayImage) -> path
    stored in the new record. Output records keep provenance back to their
    parent; the returned AugmentRecords replay each variant exactly.
    """
    out_records: list[ManifestRecord] = []
    log: list[AugmentRecord] = []
    for record in manifest.records:
        image = load_image(record)
        for index, kind, seed in plan_variants(
            record.frame_id, multiplier, master_seed, include_original
        ):
            if kind is None:
                new_img, new_anns, params = image, list(record.annotations), {}
            else:
                new_img, new_anns, params = augment_one(
                    image, list(record.annotations), kind, seed, config, drop
                )
            frame_id = f"{record.frame_id}_aug{index}"
            path = save_image(frame_id, new_img)
            out_records.append(
                ManifestRecord(
                    frame_id=frame_id,
                    image_path=str(path),
                    width=new_img.width,
                    height=new_img.height,
                    annotations=tuple(new_anns),
                    provenance="augmented",
                    parent_id=record.frame_id,
                )
            )
            log.append(AugmentRecord(record.frame_id, index, kind, params, seed))
    return DatasetManifest(out_records), log


def mosaic(
    quad: list[tuple[GrayImage, list[Annotation]]],
    output_side: int,
    seed: int,
    fill: int = 114,
    drop: bool = True,
    drop_fraction: float = 0.25,
) -> tuple[GrayImage, list[Annotation]]:
    """Stitch four images around a random center in the canvas middle half.

    Each input is letterboxed into its quadrant; boxes are offset, clipped
    to their quadrant, and subjected to the usual truncation drop rule.
    """
    if len(quad) != 4:
        raise ValueError(f"mosaic needs exactly 4 inputs, got {len(quad)}")
    if output_side < 2:
        raise ValueError(f"output_side must be >= 2, got {output_side}")
    rng = np.random.default_rng(seed)
    cx = int(rng.integers(output_side // 4, output_side - output_side // 4 + 1))
    cy = int(rng.integers(output_side // 4, output_side - output_side // 4 + 1))
    canvas = np.full((output_side, output_side), fill, dtype=np.uint8)
    quadrants = (
        (0, 0, cx, cy),
        (cx, 0, output_side, cy),
        (0, cy, cx, output_side),
        (cx, cy, output_side, output_side),
    )
    out_anns: list[Annotation] = []
    for (image, anns), (qx0, qy0, qx1, qy1) in zip(quad, quadrants):
        qw, qh = qx1 - qx0, qy1 - qy0
        if qw < 1 or qh < 1:
            continue
        scale = min(qw / image.width, qh / image.height)
        new_w = max(1, round(image.width * scale))
        new_h = max(1, round(image.height * scale))
        resized = cv2.resize(image.pixels, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
        pad_x = (qw - new_w) // 2
        pad_y = (qh - new_h) // 2
        canvas[qy0 + pad_y:qy0 + pad_y + new_h, qx0 + pad_x:qx0 + pad_x + new_w] = resized
        sx, sy = new_w / image.width, new_h / image.height
        off_x, off_y = qx0 + pad_x, qy0 + pad_y
        for ann in anns:
            b = ann.bbox
            moved = BBox(
                b.xmin * sx + off_x, b.ymin * sy + off_y,
                b.xmax * sx + off_x, b.ymax * sy + off_y,
            )
            clipped = BBox(
                max(moved.xmin, qx0), max(moved.ymin, qy0),
                min(moved.xmax, qx1), min(moved.ymax, qy1),
            ) if moved.xmax > qx0 and moved.xmin < qx1 and moved.ymax > qy0 and moved.ymin < qy1 else None
            if clipped is None or clipped.xmin >= clipped.xmax or clipped.ymin >= clipped.ymax:
                continue
            if drop and clipped.area < drop_fraction * moved.area:
                continue
            out_anns.append(Annotation(clipped, ann.class_id))
    return GrayImage(canvas), out_anns
