"""Blind linear-motion deblurring.

The blur direction is estimated from the straight weld-seam edges found by a
Hough transform (motion is parallel to the seam, so the estimator returns
line direction, not line normal). The blur length comes from line kinematics
(surface speed x exposure time). The two parameters define a motion PSF that
is inverted with a Wiener filter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np
from scipy import ndimage
from scipy.fft import next_fast_len

from .core import (
    GrayImage,
    Kernel,
    frequency_transform,
    inverse_frequency_transform,
    quantize_u8,
)


class NoLineError(RuntimeError):
    """No line detections to estimate a blur angle from."""


class ParameterError(ValueError):
    """A kinematic or detector parameter is out of range."""


@dataclass(frozen=True)
class LineDetection:
    """One (rho, theta) Hough peak. theta is the line normal in degrees."""

    rho: float
    theta: float
    votes: int

    @property
    def direction(self) -> float:
        """Line direction in degrees, [0, 180)."""
        return (self.theta + 90.0) % 180.0


@dataclass(frozen=True)
class BlurEstimate:
    angle_deg: float
    length_px: int

    def __post_init__(self):
        if self.length_px < 1:
            raise ParameterError(f"blur length must be >= 1, got {self.length_px}")
        object.__setattr__(self, "angle_deg", self.angle_deg % 180.0)


def hough_lines(
    image: GrayImage,
    edge_threshold: float = 150.0,
    vote_threshold: int = 50,
    theta_step: float = 1.0,
    rho_step: float = 1.0,
) -> list[LineDetection]:
    """Accumulator Hough transform over a Sobel gradient-magnitude edge map.

    Returns local-maximum cells above vote_threshold, sorted by votes
    descending (ties by rho then theta for determinism).
    """
    if edge_threshold <= 0 or vote_threshold <= 0 or rho_step <= 0:
        raise ParameterError("thresholds and rho_step must be positive")
    if theta_step <= 0 or abs(180.0 / theta_step - round(180.0 / theta_step)) > 1e-9:
        raise ParameterError(f"theta_step must divide 180, got {theta_step}")

    f = image.to_float()
    gx = cv2.Sobel(f, cv2.CV_64F, 1, 0, ksize=3)
    gy = cv2.Sobel(f, cv2.CV_64F, 0, 1, ksize=3)
    mag = np.hypot(gx, gy)
    ys, xs = np.nonzero(mag > edge_threshold)
    if xs.size == 0:
        return []

    n_theta = round(180.0 / theta_step)
    thetas = np.arange(n_theta) * theta_step
    diag = math.hypot(image.width, image.height)
    n_rho = int(2 * math.ceil(diag / rho_step)) + 1
    rho_offset = (n_rho - 1) // 2

    acc = np.zeros((n_rho, n_theta), dtype=np.int64)
    xs_f = xs.astype(np.float64)
    ys_f = ys.astype(np.float64)
    for j, theta in enumerate(np.deg2rad(thetas)):
        rho = xs_f * math.cos(theta) + ys_f * math.sin(theta)
        idx = np.rint(rho / rho_step).astype(np.int64) + rho_offset
        acc[:, j] += np.bincount(idx, minlength=n_rho)

    # local maxima (8-neighborhood, theta wraps) above the vote threshold
    wrapped = np.concatenate([acc[:, -1:], acc, acc[:, :1]], axis=1)
    local_max = ndimage.maximum_filter(wrapped, size=3, mode="constant")[:, 1:-1]
    peaks = (acc >= vote_threshold) & (acc == local_max)
    rr, tt = np.nonzero(peaks)
    lines = [
        LineDetection(
            rho=float((r - rho_offset) * rho_step),
            theta=float(thetas[t]),
            votes=int(acc[r, t]),
        )
        for r, t in zip(rr, tt)
    ]
    lines.sort(key=lambda ln: (-ln.votes, ln.rho, ln.theta))
    return lines


def estimate_blur_angle(lines: list[LineDetection], top_k: int = 5) -> float:
    """Vote-weighted circular mean (period 180 deg) of the top-k directions."""
    if not lines:
        raise NoLineError("no lines detected; cannot estimate blur angle")
    top = lines[:top_k]
    # double the angles so the 180-degree period becomes a full circle
    doubled = np.deg2rad([2.0 * ln.direction for ln in top])
    weights = np.array([ln.votes for ln in top], dtype=np.float64)
    s = float(np.sum(weights * np.sin(doubled)))
    c = float(np.sum(weights * np.cos(doubled)))
    mean = math.degrees(math.atan2(s, c)) / 2.0
    return mean % 180.0


def estimate_blur_length(surface_speed_px_per_s: float, exposure_s: float) -> int:
    """Blur extent in pixels: round(speed x exposure), floored at 1."""
    if surface_speed_px_per_s <= 0 or exposure_s <= 0:
        raise ParameterError("speed and exposure must be positive")
    return max(1, round(surface_speed_px_per_s * exposure_s))


def motion_psf(angle_deg: float, length_px: int) -> Kernel:
    """Anti-aliased line-segment PSF through the kernel center.

    Kernel side = next odd integer >= length. Sample points sit at unit
    spacing along the segment and deposit bilinear weights, so axis-aligned
    angles give exact uniform rows/columns.
    """
    if length_px < 1:
        raise ParameterError(f"length must be >= 1, got {length_px}")
    side = length_px if length_px % 2 == 1 else length_px + 1
    center = side // 2
    weights = np.zeros((side, side), dtype=np.float64)
    theta = math.radians(angle_deg)
    dx, dy = math.cos(theta), math.sin(theta)
    for i in range(length_px):
        t = i - (length_px - 1) / 2.0
        x = center + t * dx
        y = center + t * dy
        x0, y0 = int(math.floor(x)), int(math.floor(y))
        fx, fy = x - x0, y - y0
        for (yy, xx, w) in (
            (y0, x0, (1 - fx) * (1 - fy)),
            (y0, x0 + 1, fx * (1 - fy)),
            (y0 + 1, x0, (1 - fx) * fy),
            (y0 + 1, x0 + 1, fx * fy),
        ):
            if w > 0 and 0 <= yy < side and 0 <= xx < side:
                weights[yy, xx] += w
    weights /= weights.sum()
    return Kernel(weights)


def wiener_deconvolve(blurred: GrayImage, psf: Kernel, nsr: float = 1e-2) -> GrayImage:
    """Frequency-domain Wiener filter with a scalar noise-to-signal ratio.

    The PSF is zero-padded and center-aligned to the image grid. With nsr=0
    the power spectrum is floored at 1e-12 (motion PSFs have spectral zeros).
    """
    if nsr < 0:
        raise ParameterError(f"nsr must be >= 0, got {nsr}")
    if psf.height > blurred.height or psf.width > blurred.width:
        raise ParameterError("psf larger than image")
    # Work on an edge-replicated margin and taper the border toward a
    # circularly blurred copy so the periodic model stays consistent at the
    # frame edge; without this the PSF's spectral zeros smear the boundary
    # discontinuity over the whole restoration.
    margin = max(psf.height, psf.width)
    # extra right/bottom replication up to an FFT-friendly length
    h = next_fast_len(blurred.height + 2 * margin)
    w = next_fast_len(blurred.width + 2 * margin)
    f = np.pad(
        blurred.to_float(),
        (
            (margin, h - blurred.height - margin),
            (margin, w - blurred.width - margin),
        ),
        mode="edge",
    )
    padded = np.zeros((h, w), dtype=np.float64)
    r0 = h // 2 - psf.height // 2
    c0 = w // 2 - psf.width // 2
    padded[r0:r0 + psf.height, c0:c0 + psf.width] = psf.weights
    H = frequency_transform(np.fft.ifftshift(padded))
    if margin > 1:
        circ = inverse_frequency_transform(frequency_transform(f) * H)
        ramp_y = np.minimum(np.minimum(np.arange(h), h - 1 - np.arange(h)) / margin, 1.0)
        ramp_x = np.minimum(np.minimum(np.arange(w), w - 1 - np.arange(w)) / margin, 1.0)
        window = np.outer(ramp_y, ramp_x)
        f = window * f + (1.0 - window) * circ
    # filter about the mean so a unit-sum PSF leaves flat fields untouched
    mean = float(f.mean())
    G = frequency_transform(f - mean)
    power = np.abs(H) ** 2
    denom = power + nsr if nsr > 0 else np.maximum(power, 1e-12)
    restored = mean + inverse_frequency_transform(np.conj(H) * G / denom)
    restored = restored[margin:margin + blurred.height, margin:margin + blurred.width]
    return GrayImage(quantize_u8(restored))


@dataclass(frozen=True)
class DeblurResult:
    image: GrayImage
    estimate: BlurEstimate | None
    status: str  # "ok" | "skipped"


def deblur_auto(
    image: GrayImage,
    surface_speed_px_per_s: float,
    exposure_s: float,
    nsr: float = 1e-2,
    edge_threshold: float = 150.0,
    vote_threshold: int = 50,
    theta_step: float = 1.0,
    rho_step: float = 1.0,
) -> DeblurResult:
    """Full blind-deblur pipeline; returns the original unchanged when no
    seam line can be found."""
    lines = hough_lines(image, edge_threshold, vote_threshold, theta_step, rho_step)
    try:
        angle = estimate_blur_angle(lines)
    except NoLineError:
        return DeblurResult(image, None, "skipped")
    length = estimate_blur_length(surface_speed_px_per_s, exposure_s)
    estimate = BlurEstimate(angle_deg=angle, length_px=length)
    psf = motion_psf(estimate.angle_deg, estimate.length_px)
    restored = wiener_deconvolve(image, psf, nsr)
    return DeblurResult(restored, estimate, "ok")
