"""Frame ingestion: RAW decoding, grayscale conversion, cropping, letterbox.

RAW frames are headerless row-major dumps; the layout comes entirely from a
RawSpec supplied by the caller (CLI flags). 16-bit samples are windowed to
8 bits with an explicit (lo, hi) window so a sequence stays brightness-stable.
"""
from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .core import BBox, GeometryError, GrayImage, quantize_u8


class DecodeError(ValueError):
    """Byte payload does not match the declared RAW layout."""


class SpecError(ValueError):
    """A RawSpec field is out of range."""


@dataclass(frozen=True)
class RawSpec:
    width: int
    height: int
    bit_depth: int = 8
    endianness: str = "little"
    window: tuple[float, float] = (0.0, 65535.0)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise SpecError(f"bad frame dimensions {self.width}x{self.height}")
        if self.bit_depth not in (8, 16):
            raise SpecError(f"bit_depth must be 8 or 16, got {self.bit_depth}")
        if self.endianness not in ("little", "big"):
            raise SpecError(f"endianness must be little|big, got {self.endianness!r}")
        lo, hi = self.window
        if not lo < hi:
            raise SpecError(f"window lo must be < hi, got ({lo}, {hi})")

    @property
    def byte_length(self) -> int:
        return self.width * self.height * (self.bit_depth // 8)


def decode_raw(data: bytes, spec: RawSpec) -> GrayImage:
    """Decode a headerless RAW frame per its spec."""
    if len(data) != spec.byte_length:
        raise DecodeError(
            f"expected {spec.byte_length} bytes for "
            f"{spec.width}x{spec.height}@{spec.bit_depth}, got {len(data)}"
        )
    if spec.bit_depth == 8:
        px = np.frombuffer(data, dtype=np.uint8).reshape(spec.height, spec.width)
        return GrayImage(px.copy())
    dtype = "<u2" if spec.endianness == "little" else ">u2"
    samples = np.frombuffer(data, dtype=dtype).astype(np.float64)
    lo, hi = spec.window
    scaled = 255.0 * (samples - lo) / (hi - lo)
    return GrayImage(quantize_u8(scaled.reshape(spec.height, spec.width)))


def to_grayscale(rgb: np.ndarray) -> GrayImage:
    """BT.601 luma conversion of an (H, W, 3) RGB array."""
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DecodeError(f"expected (H, W, 3) RGB array, got shape {arr.shape}")
    luma = 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]
    return GrayImage(quantize_u8(luma))


def crop(image: GrayImage, rect: BBox) -> GrayImage:
    """Exact pixel copy of an integer-cornered region."""
    x0, y0, x1, y1 = rect.xmin, rect.ymin, rect.xmax, rect.ymax
    for v in (x0, y0, x1, y1):
        if v != int(v):
            raise GeometryError(f"crop rect must have integer corners: {rect}")
    x0, y0, x1, y1 = int(x0), int(y0), int(x1), int(y1)
    if x0 < 0 or y0 < 0 or x1 > image.width or y1 > image.height:
        raise GeometryError(
            f"crop rect {rect} outside image {image.width}x{image.height}"
        )
    return GrayImage(image.pixels[y0:y1, x0:x1].copy())


@dataclass(frozen=True)
class LetterboxTransform:
    """Scale-then-pad mapping from source to letterboxed coordinates."""

    scale: float
    pad_left: int
    pad_top: int

    def apply_box(self, box: BBox) -> BBox:
        return BBox(
            box.xmin * self.scale + self.pad_left,
            box.ymin * self.scale + self.pad_top,
            box.xmax * self.scale + self.pad_left,
            box.ymax * self.scale + self.pad_top,
        )

    def invert_box(self, box: BBox) -> BBox:
        return BBox(
            (box.xmin - self.pad_left) / self.scale,
            (box.ymin - self.pad_top) / self.scale,
            (box.xmax - self.pad_left) / self.scale,
            (box.ymax - self.pad_top) / self.scale,
        )


def letterbox(
    image: GrayImage,
    target_long_side: int,
    stride: int = 32,
    fill: int = 114,
) -> tuple[GrayImage, LetterboxTransform]:
    """Aspect-preserving resize + symmetric pad to stride-aligned dims.

    The long side becomes exactly target_long_side (which must be a stride
    multiple); both dims are padded up to the next stride multiple, odd pads
    putting the extra pixel on the right/bottom.
    """
    if stride < 1:
        raise SpecError(f"stride must be >= 1, got {stride}")
    if target_long_side % stride != 0:
        raise SpecError(
            f"target {target_long_side} is not a multiple of stride {stride}"
        )
    w, h = image.width, image.height
    long_side = max(w, h)
    scale = target_long_side / long_side
    new_w = target_long_side if w >= h else max(1, round(w * scale))
    new_h = target_long_side if h >= w else max(1, round(h * scale))
    if (new_w, new_h) == (w, h):
        resized = image.pixels
    else:
        resized = cv2.resize(image.pixels, (new_w, new_h), interpolation=cv2.INTER_LINEAR)

    def pad_amounts(dim: int) -> tuple[int, int]:
        total = (-dim) % stride
        lead = total // 2
        return lead, total - lead

    pad_left, pad_right = pad_amounts(new_w)
    pad_top, pad_bottom = pad_amounts(new_h)
    out = cv2.copyMakeBorder(
        resized, pad_top, pad_bottom, pad_left, pad_right,
        cv2.BORDER_CONSTANT, value=int(fill),
    )
    return GrayImage(out), LetterboxTransform(scale, pad_left, pad_top)
