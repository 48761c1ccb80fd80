"""Mouth-region preprocessing: RGB lip frames to normalized binary masks.

Frames are plain numpy arrays: an RGB frame is (H, W, 3) with channel values
in [0, 255], a gray frame is (H, W) real-valued in [0, 255], and a binary
frame is (H, W) uint8 holding only {0, 1}. The preprocessing chain is

    lip_emphasis -> median_filter -> binarize_otsu -> crop_resize

and always ends at the canonical 120x120 geometry.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from PIL import Image

TARGET_SIZE = 120

# Rec. 601 luma weights.
LUMA_R, LUMA_G, LUMA_B = 0.299, 0.587, 0.114

_FRAME_SUFFIXES = (".png", ".pgm", ".ppm")


@dataclass(frozen=True)
class BoundingBox:
    """Pixel-space crop rectangle; (x0, y0) is the top-left corner."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"bounding box must have positive extent, got {self}")
        if self.x0 < 0 or self.y0 < 0:
            raise ValueError(f"bounding box origin must be non-negative, got {self}")

    def check_within(self, width: int, height: int) -> None:
        if self.x0 + self.w > width or self.y0 + self.h > height:
            raise ValueError(
                f"bounding box {self} exceeds frame extent {width}x{height}"
            )


@dataclass
class RoiConfig:
    median_radius: int = 1
    feature_source: str = "binary"  # which image the moment stage consumes

    def validate(self) -> None:
        if self.median_radius < 0:
            raise ValueError("median_radius must be >= 0")
        if self.feature_source not in ("binary", "gray"):
            raise ValueError("feature_source must be 'binary' or 'gray'")


def full_frame_box(width: int, height: int) -> BoundingBox:
    """Default crop when a manifest declares no mouth box."""
    return BoundingBox(0, 0, width, height)


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """Weighted-luma grayscale of an (H, W, 3) RGB frame, float32."""
    f = _as_rgb(frame)
    return LUMA_R * f[:, :, 0] + LUMA_G * f[:, :, 1] + LUMA_B * f[:, :, 2]


def lip_emphasis(frame: np.ndarray) -> np.ndarray:
    """Absolute gray-minus-red difference; highlights red-dominant lip pixels.

    Achromatic pixels (R == G == B) map to 0, so skin and background drop
    out while saturated lips stay bright. Output is clamped to [0, 255].
    """
    f = _as_rgb(frame)
    out = np.abs(to_grayscale(f) - f[:, :, 0])
    np.clip(out, 0.0, 255.0, out=out)
    return out


def median_filter(frame: np.ndarray, radius: int) -> np.ndarray:
    """Median over the (2r+1)^2 neighborhood with replicated borders.

    Radius 0 is the identity. Output dtype matches the input; float32 and
    uint8 inputs take an optimized path, anything else falls back to an
    explicit sliding-window median.
    """
    if radius < 0:
        raise ValueError("median radius must be >= 0")
    if radius == 0:
        return frame.copy()
    k = 2 * radius + 1
    # cv2.medianBlur uses BORDER_REPLICATE, identical to edge padding.
    if frame.dtype == np.uint8 or (frame.dtype == np.float32 and k <= 5):
        return cv2.medianBlur(np.ascontiguousarray(frame), k)
    padded = np.pad(frame, radius, mode="edge")
    windows = sliding_window_view(padded, (k, k))
    return np.median(windows, axis=(2, 3)).astype(frame.dtype, copy=False)


def otsu_threshold(frame: np.ndarray) -> float | None:
    """Between-class-variance-maximizing threshold over a 256-bin histogram.

    Returns the threshold as bin_index + 0.5 so that integer-valued images
    split exactly at the classic bin boundary, or None for a constant frame
    (no split exists). Ties resolve to the lowest bin.
    """
    flat = np.asarray(frame).ravel()
    if flat.size == 0:
        raise ValueError("cannot threshold an empty frame")
    lo = float(flat.min())
    hi = float(flat.max())
    if lo == hi:
        return None
    if lo < 0.0 or hi > 255.0:
        flat = np.clip(flat, 0.0, 255.0)
    # Values are within [0, 255]; truncation to uint8 is the bin index.
    hist = np.bincount(flat.astype(np.uint8), minlength=256).astype(np.float64)
    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    omega = np.cumsum(hist)
    mu = np.cumsum(hist * levels)
    mu_total = mu[-1]
    valid = (omega > 0) & (omega < total)
    between = np.zeros(256)
    between[valid] = (mu_total * omega[valid] - total * mu[valid]) ** 2 / (
        omega[valid] * (total - omega[valid])
    )
    t = int(np.argmax(between))
    return t + 0.5


def binarize_otsu(frame: np.ndarray) -> np.ndarray:
    """Binarize a gray frame at its Otsu threshold (1 iff intensity > t).

    A constant frame has no threshold and maps to all zeros, so empty or
    silent frames flow through the pipeline instead of erroring.
    """
    t = otsu_threshold(frame)
    if t is None:
        return np.zeros(frame.shape, dtype=np.uint8)
    return (frame > t).astype(np.uint8)


def crop_resize(
    frame: np.ndarray,
    box: BoundingBox,
    *,
    binary: bool | None = None,
    size: int = TARGET_SIZE,
) -> np.ndarray:
    """Crop to ``box`` and bilinearly resample to size x size.

    Binary frames are resampled as floats and re-thresholded at 0.5 so the
    output stays in {0, 1}; pass ``binary`` explicitly to skip the value
    scan that otherwise detects the frame kind.
    """
    h, w = frame.shape[:2]
    box.check_within(w, h)
    if binary is None:
        binary = frame.dtype == np.uint8 and frame.max(initial=0) <= 1
    crop = frame[box.y0 : box.y0 + box.h, box.x0 : box.x0 + box.w]
    src = np.ascontiguousarray(crop, dtype=np.float32)
    out = cv2.resize(src, (size, size), interpolation=cv2.INTER_LINEAR)
    if binary:
        return (out >= 0.5).astype(np.uint8)
    return out


def preprocess_frame(
    frame: np.ndarray, box: BoundingBox, cfg: RoiConfig | None = None
) -> np.ndarray:
    """Full chain from an RGB mouth frame to a 120x120 binary lip mask."""
    cfg = cfg or RoiConfig()
    emphasized = lip_emphasis(frame)
    filtered = median_filter(emphasized, cfg.median_radius)
    mask = binarize_otsu(filtered)
    return crop_resize(mask, box, binary=True)


def preprocess_frame_gray(
    frame: np.ndarray, box: BoundingBox, cfg: RoiConfig | None = None
) -> np.ndarray:
    """Like preprocess_frame but stops before binarization.

    Used when the moment stage is configured to consume the gray emphasis
    image rather than the binary mask.
    """
    cfg = cfg or RoiConfig()
    emphasized = lip_emphasis(frame)
    filtered = median_filter(emphasized, cfg.median_radius)
    return crop_resize(filtered, box, binary=False)


def read_rgb_frame(path: str | Path) -> np.ndarray:
    """Load a lossless image file (PNG/PGM/PPM) as an (H, W, 3) uint8 array."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def read_frame_sequence(frames_dir: str | Path) -> list[np.ndarray]:
    """Load a directory of frames ordered by zero-padded numeric filename."""
    d = Path(frames_dir)
    if not d.is_dir():
        raise FileNotFoundError(f"frame directory not found: {d}")
    paths = sorted(
        p for p in d.iterdir() if p.suffix.lower() in _FRAME_SUFFIXES
    )
    if not paths:
        raise FileNotFoundError(f"no frame files in {d}")
    return [read_rgb_frame(p) for p in paths]


def write_mask_pgm(path: str | Path, mask: np.ndarray) -> None:
    """Persist a binary mask as a PGM file with values {0, 255}."""
    Image.fromarray((np.asarray(mask, dtype=np.uint8) * 255)).save(path)


def frame_number(path: str | Path) -> int | None:
    """Trailing number in a frame filename, if any (frame_0007.png -> 7)."""
    m = re.search(r"(\d+)\.[^.]+$", Path(path).name)
    return int(m.group(1)) if m else None


def _as_rgb(frame: np.ndarray) -> np.ndarray:
    a = np.asarray(frame)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB frame, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("frame must have positive extent")
    return a.astype(np.float32, copy=False)
