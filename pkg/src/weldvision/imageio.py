"""Grayscale image file IO.

Canonical on-disk format is binary PGM (P5, maxval 255). PNG/JPG are
accepted on ingestion; PNG output is available on request.
"""
from __future__ import annotations

import re
from pathlib import Path

import cv2
import numpy as np

from .core import GrayImage


class ImageIOError(ValueError):
    """File could not be decoded as a supported image."""


_PGM_HEADER = re.compile(rb"^P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s")


def write_pgm(image: GrayImage, path: str | Path) -> None:
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.pixels.tobytes())


def read_pgm(path: str | Path) -> GrayImage:
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if not m:
        raise ImageIOError(f"not a binary PGM file: {path}")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ImageIOError(f"unsupported PGM maxval {maxval} in {path}")
    body = data[m.end():]
    if len(body) < width * height:
        raise ImageIOError(f"truncated PGM payload in {path}")
    px = np.frombuffer(body[: width * height], dtype=np.uint8).reshape(height, width)
    return GrayImage(px.copy())


def write_png(image: GrayImage, path: str | Path) -> None:
    ok = cv2.imwrite(str(path), image.pixels)
    if not ok:
        raise ImageIOError(f"failed to write {path}")


def read_image(path: str | Path) -> GrayImage:
    """Read PGM/PNG/JPG as grayscale (BT.601 for color inputs)."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    raw = np.fromfile(str(path), dtype=np.uint8)
    decoded = cv2.imdecode(raw, cv2.IMREAD_UNCHANGED)
    if decoded is None:
        raise ImageIOError(f"could not decode image: {path}")
    if decoded.ndim == 3:
        # cv2 decodes BGR; BT.601 luma matches ingest.to_grayscale
        decoded = cv2.cvtColor(decoded, cv2.COLOR_BGR2GRAY)
    if decoded.dtype != np.uint8:
        decoded = np.clip(decoded, 0, 255).astype(np.uint8)
    return GrayImage(decoded)
