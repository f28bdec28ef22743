"""Deterministic synthetic weld-image and detection generator.

Stands in for the proprietary factory dataset: renders a bright weld band
with two straight edges at a chosen orientation, drops crude per-class
defect primitives inside it, and can forward-model motion blur and detector
error so the rest of the pipeline has a ground-truth oracle to test against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np
from scipy import ndimage

from .core import Annotation, BBox, GrayImage, NUM_CLASSES, quantize_u8
from .deblur import motion_psf
from .core import convolve_float
from .metrics import Detection


class SceneError(ValueError):
    """A defect primitive does not fit inside the image."""


@dataclass(frozen=True)
class DefectSpec:
    class_id: int
    cx: float
    cy: float
    w: float
    h: float

    @property
    def bbox(self) -> BBox:
        return BBox(
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )


@dataclass(frozen=True)
class SynthScene:
    width: int
    height: int
    seam_angle_deg: float = 0.0
    band_width: float = 80.0
    edge_contrast: float = 110.0
    defects: tuple[DefectSpec, ...] = ()
    noise_sigma: float = 2.0
    texture_sigma: float = 12.0  # band-limited film-grain amplitude
    texture_scale: float = 1.0   # grain correlation length (gaussian sigma)
    fade_border: float = 24.0    # px over which content fades to background
    seed: int = 0


_BACKGROUND = 50.0


def _band_mask(scene: SynthScene) -> np.ndarray:
    ys, xs = np.mgrid[0:scene.height, 0:scene.width]
    cx, cy = (scene.width - 1) / 2.0, (scene.height - 1) / 2.0
    phi = math.radians(scene.seam_angle_deg)
    # signed distance to the seam center line (direction phi through center)
    dist = -(xs - cx) * math.sin(phi) + (ys - cy) * math.cos(phi)
    return np.abs(dist) < scene.band_width / 2.0


def _draw_defect(canvas: np.ndarray, spec: DefectSpec, rng: np.random.Generator) -> None:
    """Render one defect primitive inside its declared box."""
    x0, y0 = spec.cx - spec.w / 2.0, spec.cy - spec.h / 2.0
    cx, cy = int(round(spec.cx)), int(round(spec.cy))
    ax = max(1, int(spec.w / 2.0))
    ay = max(1, int(spec.h / 2.0))
    band_val = _BACKGROUND + 110.0
    dark = band_val - 85.0
    cid = spec.class_id
    if cid in (0, 1, 6):  # blow-hole / undercut / lack-of-fusion: dark ellipse
        cv2.ellipse(canvas, (cx, cy), (ax, ay), 0, 0, 360, dark, -1)
    elif cid == 3:  # crack: thin zigzag polyline spanning the box
        n = 6
        ts = np.linspace(0.05, 0.95, n)
        jitter = rng.uniform(0.2, 0.8, size=n)
        pts = np.stack(
            [x0 + ts * spec.w, y0 + jitter * spec.h], axis=1
        ).round().astype(np.int32)
        cv2.polylines(canvas, [pts], False, dark, 1)
    elif cid == 4:  # overlap: bright blob
        cv2.ellipse(canvas, (cx, cy), (ax, ay), 0, 0, 360, band_val + 60.0, -1)
    elif cid == 7:  # hollow-bead: dark ring with brighter core
        cv2.ellipse(canvas, (cx, cy), (ax, ay), 0, 0, 360, dark, -1)
        cv2.ellipse(
            canvas, (cx, cy), (max(1, ax // 2), max(1, ay // 2)),
            0, 0, 360, band_val - 20.0, -1,
        )
    else:  # broken-arc / slag-inclusion: irregular dark polygon
        n = 7
        angles = np.linspace(0, 2 * math.pi, n, endpoint=False)
        radii = rng.uniform(0.55, 0.95, size=n)
        pts = np.stack(
            [spec.cx + radii * ax * np.cos(angles),
             spec.cy + radii * ay * np.sin(angles)], axis=1,
        ).round().astype(np.int32)
        cv2.fillPoly(canvas, [pts], dark)


def generate_scene(scene: SynthScene) -> tuple[GrayImage, list[Annotation]]:
    """Render the scene; ground-truth boxes are the primitives' enclosing
    boxes. Fully determined by (scene, scene.seed)."""
    for spec in scene.defects:
        b = spec.bbox
        if b.xmin < 0 or b.ymin < 0 or b.xmax > scene.width or b.ymax > scene.height:
            raise SceneError(f"defect box {b} outside {scene.width}x{scene.height}")
        if not 0 <= spec.class_id < NUM_CLASSES:
            raise SceneError(f"bad class id {spec.class_id}")
    rng = np.random.default_rng(scene.seed)
    canvas = np.full((scene.height, scene.width), _BACKGROUND, dtype=np.float64)
    canvas[_band_mask(scene)] += scene.edge_contrast
    for spec in scene.defects:
        _draw_defect(canvas, spec, rng)
    if scene.texture_sigma > 0:
        grain = ndimage.gaussian_filter(
            rng.normal(0.0, 1.0, canvas.shape), scene.texture_scale
        )
        canvas = canvas + grain * (scene.texture_sigma / grain.std())
    if scene.fade_border > 0:
        # fade everything to the flat background near the frame edge so a
        # motion-blurred copy stays consistent with replicated boundaries
        h, w = canvas.shape
        ry = np.minimum(np.minimum(np.arange(h), h - 1 - np.arange(h)) / scene.fade_border, 1.0)
        rx = np.minimum(np.minimum(np.arange(w), w - 1 - np.arange(w)) / scene.fade_border, 1.0)
        window = np.outer(ry, rx)
        canvas = _BACKGROUND + (canvas - _BACKGROUND) * window
    if scene.noise_sigma > 0:
        canvas = canvas + rng.normal(0.0, scene.noise_sigma, canvas.shape)
    anns = [Annotation(spec.bbox, spec.class_id) for spec in scene.defects]
    return GrayImage(quantize_u8(canvas)), anns


def random_scene(
    width: int,
    height: int,
    seed: int,
    n_defects: int = 4,
    seam_angle_deg: float | None = None,
    noise_sigma: float = 2.0,
) -> SynthScene:
    """Build a randomized but fully seeded scene description."""
    rng = np.random.default_rng(seed)
    if seam_angle_deg is None:
        seam_angle_deg = float(rng.choice([0.0, 30.0, 60.0, 90.0]))
    band_width = 0.4 * min(width, height)
    defects = []
    margin = 0.18
    for _ in range(n_defects):
        cid = int(rng.integers(0, NUM_CLASSES))
        w = float(rng.uniform(0.06, 0.14) * width)
        h = float(rng.uniform(0.05, 0.12) * height)
        cx = float(rng.uniform(margin * width + w / 2, (1 - margin) * width - w / 2))
        cy = float(rng.uniform(margin * height + h / 2, (1 - margin) * height - h / 2))
        defects.append(DefectSpec(cid, cx, cy, w, h))
    return SynthScene(
        width=width,
        height=height,
        seam_angle_deg=seam_angle_deg,
        band_width=band_width,
        defects=tuple(defects),
        noise_sigma=noise_sigma,
        seed=seed,
    )


def blur_scene(
    image: GrayImage,
    angle_deg: float,
    length_px: int,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> GrayImage:
    """Forward model of the line's degradation: motion blur + sensor noise."""
    psf = motion_psf(angle_deg, length_px)
    blurred = convolve_float(image.to_float(), psf)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        blurred = blurred + rng.normal(0.0, noise_sigma, blurred.shape)
    return GrayImage(quantize_u8(blurred))


def perturb_to_detections(
    frame_id: str,
    gts: list[Annotation],
    width: int,
    height: int,
    miss_rate: float = 0.0,
    false_positive_rate: float = 0.0,
    jitter_sigma: float = 0.0,
    seed: int = 0,
) -> list[Detection]:
    """Derive detector output from ground truth with a seeded error model.

    Kept boxes are jittered and given high confidence (exactly 1.0 when
    jitter_sigma is 0); extra false boxes carry low-biased confidence.
    """
    if not 0.0 <= miss_rate <= 1.0 or not 0.0 <= false_positive_rate <= 1.0:
        raise ValueError("rates must be in [0, 1]")
    rng = np.random.default_rng(seed)
    dets: list[Detection] = []
    for ann in gts:
        if rng.random() < miss_rate:
            continue
        b = ann.bbox
        if jitter_sigma > 0:
            d = rng.normal(0.0, jitter_sigma, size=4)
            jittered = BBox(
                min(b.xmin + d[0], b.xmax + d[2] - 1e-3),
                min(b.ymin + d[1], b.ymax + d[3] - 1e-3),
                max(b.xmax + d[2], b.xmin + d[0] + 1e-3),
                max(b.ymax + d[3], b.ymin + d[1] + 1e-3),
            )
            conf = float(np.clip(1.0 - 0.02 * np.mean(np.abs(d)), 0.55, 1.0))
        else:
            jittered = b
            conf = 1.0
        dets.append(Detection(frame_id, jittered, ann.class_id, round(conf, 6)))
    for ann in gts:
        if rng.random() < false_positive_rate:
            w = float(rng.uniform(4.0, max(5.0, 0.2 * width)))
            h = float(rng.uniform(4.0, max(5.0, 0.2 * height)))
            x0 = float(rng.uniform(0.0, width - w))
            y0 = float(rng.uniform(0.0, height - h))
            cid = int(rng.integers(0, NUM_CLASSES))
            conf = round(float(rng.uniform(0.05, 0.5)), 6)
            dets.append(Detection(frame_id, BBox(x0, y0, x0 + w, y0 + h), cid, conf))
    return dets
