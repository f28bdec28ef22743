"""Core image/geometry types and the shared numeric kernels.

Everything here is pure: images in, images out, no global state. Intensity
math is done in float64 and quantized to uint8 (round-half-up, clamp to
[0, 255]) only at the boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

# Canonical defect class table. Order is load-bearing: class ids are the
# positions in this tuple and every parser/writer maps through it.
CLASS_LABELS = (
    "blow-hole",
    "undercut",
    "broken-arc",
    "crack",
    "overlap",
    "slag-inclusion",
    "lack-of-fusion",
    "hollow-bead",
)
LABEL_TO_ID = {name: i for i, name in enumerate(CLASS_LABELS)}
NUM_CLASSES = len(CLASS_LABELS)


class DimensionError(ValueError):
    """Shapes of two operands are incompatible."""


class GeometryError(ValueError):
    """A rectangle or point falls outside its allowed region."""


class KernelError(ValueError):
    """A convolution kernel violates its invariants."""


def quantize_u8(field: np.ndarray) -> np.ndarray:
    """Round half-up and clamp a float field to uint8."""
    arr = np.asarray(field, dtype=np.float64)
    return np.clip(np.floor(arr + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """2-D single-channel 8-bit raster, row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise DimensionError(f"expected 2-D pixel array, got ndim={px.ndim}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise DimensionError(f"empty image shape {px.shape}")
        if px.dtype != np.uint8:
            raise DimensionError(f"expected uint8 pixels, got {px.dtype}")
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_float(cls, field: np.ndarray) -> "GrayImage":
        """Quantize a float field into an image."""
        return cls(quantize_u8(field))

    def to_float(self) -> np.ndarray:
        return self.pixels.astype(np.float64)

    def same_pixels(self, other: "GrayImage") -> bool:
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in continuous pixel coordinates, half-open corners."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        for v in (self.xmin, self.ymin, self.xmax, self.ymax):
            if not math.isfinite(v):
                raise GeometryError(f"non-finite bbox coordinate: {self!r}")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise GeometryError(f"bbox must have positive area: {self!r}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0

    def clip_to(self, width: float, height: float) -> "BBox | None":
        """Clip to an image frame; None if nothing with area remains."""
        xmin = max(self.xmin, 0.0)
        ymin = max(self.ymin, 0.0)
        xmax = min(self.xmax, float(width))
        ymax = min(self.ymax, float(height))
        if xmin >= xmax or ymin >= ymax:
            return None
        return BBox(xmin, ymin, xmax, ymax)


@dataclass(frozen=True)
class Annotation:
    """A defect box plus its class."""

    bbox: BBox
    class_id: int

    def __post_init__(self):
        if not 0 <= self.class_id < NUM_CLASSES:
            raise ValueError(f"class_id out of range: {self.class_id}")

    @property
    def class_label(self) -> str:
        return CLASS_LABELS[self.class_id]

    @classmethod
    def from_label(cls, bbox: BBox, label: str) -> "Annotation":
        if label not in LABEL_TO_ID:
            raise ValueError(f"unknown label: {label}")
        return cls(bbox, LABEL_TO_ID[label])


@dataclass(frozen=True, eq=False)
class Kernel:
    """Odd-sized non-negative 2-D kernel summing to 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise KernelError(f"kernel must be 2-D, got ndim={w.ndim}")
        if w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0:
            raise KernelError(f"kernel dimensions must be odd, got {w.shape}")
        if np.any(w < 0):
            raise KernelError("kernel weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise KernelError(f"kernel must sum to 1, got {w.sum()!r}")
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def width(self) -> int:
        return self.weights.shape[1]

    @property
    def height(self) -> int:
        return self.weights.shape[0]


def convolve(image: GrayImage, kernel: Kernel) -> GrayImage:
    """Convolve with edge-replicate boundary handling.

    Output has the source dimensions; values are computed in float and
    quantized once at the end.
    """
    if kernel.height > image.height or kernel.width > image.width:
        raise DimensionError(
            f"kernel {kernel.weights.shape} larger than image "
            f"{image.pixels.shape}"
        )
    out = ndimage.convolve(image.to_float(), kernel.weights, mode="nearest")
    return GrayImage.from_float(out)


def convolve_float(field: np.ndarray, kernel: Kernel) -> np.ndarray:
    """Edge-replicate convolution without quantization (internal use)."""
    return ndimage.convolve(np.asarray(field, dtype=np.float64), kernel.weights, mode="nearest")


def psnr(reference: GrayImage, candidate: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB; +inf when the images are identical."""
    if reference.pixels.shape != candidate.pixels.shape:
        raise DimensionError(
            f"psnr dimension mismatch: {reference.pixels.shape} vs "
            f"{candidate.pixels.shape}"
        )
    diff = reference.to_float() - candidate.to_float()
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def frequency_transform(field: np.ndarray) -> np.ndarray:
    """Forward 2-D DFT of a real field."""
    return np.fft.fft2(np.asarray(field, dtype=np.float64))


def inverse_frequency_transform(spectrum: np.ndarray) -> np.ndarray:
    """Inverse 2-D DFT, real part."""
    return np.real(np.fft.ifft2(np.asarray(spectrum, dtype=np.complex128)))
