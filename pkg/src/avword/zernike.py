"""Zernike moment features for lip-shape description.

A frame is mapped onto the unit disk and projected onto the complex
Zernike basis V_mn(r, theta) = R_mn(r) * exp(-j*n*theta); the moment
magnitudes |Z_mn| are rotation invariant, which makes them stable lip
descriptors across small head rotations. Each frame yields a fixed
vector of magnitudes and a clip is the concatenation over a fixed
number of temporally resampled frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .resample import nearest_indices

FRAME_COUNT = 52
FEATURES_PER_FRAME = 9
FEATURE_DIM = FRAME_COUNT * FEATURES_PER_FRAME

_DISK_MODES = ("cover", "contain")


def default_indices() -> list[tuple[int, int]]:
    """The nine (order, repetition) pairs used for per-frame features.

    One moment per order 1..9, alternating repetition so that both even
    and odd radial structure is sampled: (1,1), (2,0), ..., (9,1).
    """
    return [(m, m % 2) for m in range(1, 10)]


@dataclass
class ZernikeConfig:
    indices: list[tuple[int, int]] = field(default_factory=default_indices)
    disk_mode: str = "cover"  # cover: inscribed disk; contain: scale by sqrt(2)
    n_frames: int = FRAME_COUNT

    def validate(self) -> None:
        if self.disk_mode not in _DISK_MODES:
            raise ValueError(f"disk_mode must be one of {_DISK_MODES}")
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        if not self.indices:
            raise ValueError("at least one (order, repetition) pair is required")
        for m, n in self.indices:
            validate_index(m, n)


def validate_index(m: int, n: int) -> None:
    """Reject (order, repetition) pairs outside the Zernike index lattice."""
    if m < 0:
        raise ValueError(f"order must be >= 0, got m={m}")
    if abs(n) > m:
        raise ValueError(f"repetition |n| must not exceed order, got (m={m}, n={n})")
    if (m - abs(n)) % 2 != 0:
        raise ValueError(f"order minus |repetition| must be even, got (m={m}, n={n})")


def radial_polynomial(m: int, n: int, r: np.ndarray) -> np.ndarray:
    """Radial polynomial R_mn evaluated elementwise on ``r``.

    R_mn(r) = sum_s (-1)^s (m-s)! / (s! ((m+|n|)/2 - s)! ((m-|n|)/2 - s)!)
              * r^(m-2s)   for s = 0 .. (m-|n|)/2.

    Coefficients are exact integers, so R_mn(1) == 1 holds to float
    precision for every valid index pair.
    """
    validate_index(m, n)
    n = abs(n)
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    for s in range((m - n) // 2 + 1):
        coef = (
            (-1) ** s
            * math.factorial(m - s)
            // (
                math.factorial(s)
                * math.factorial((m + n) // 2 - s)
                * math.factorial((m - n) // 2 - s)
            )
        )
        out += coef * r ** (m - 2 * s)
    return out


def make_grid(
    h: int, w: int, mode: str = "cover"
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Map an h x w pixel grid onto the unit disk.

    Pixel centers land at x = (2j + 1 - w) / w, y = (2i + 1 - h) / h, so
    the image square spans [-1, 1] in both axes. Mode "cover" keeps the
    inscribed disk (pixels with r > 1 are masked out); mode "contain"
    shrinks radii by sqrt(2) so every pixel lies inside the disk, at the
    cost of leaving an unsampled annulus.

    Returns (r, theta, mask, darea) where darea is the per-pixel area
    element in disk coordinates.
    """
    if mode not in _DISK_MODES:
        raise ValueError(f"disk mode must be one of {_DISK_MODES}")
    if h < 1 or w < 1:
        raise ValueError("grid extent must be positive")
    j = np.arange(w, dtype=np.float64)
    i = np.arange(h, dtype=np.float64)
    x = (2.0 * j + 1.0 - w) / w
    y = (2.0 * i + 1.0 - h) / h
    xx, yy = np.meshgrid(x, y)
    r = np.hypot(xx, yy)
    theta = np.arctan2(yy, xx)
    darea = (2.0 / w) * (2.0 / h)
    if mode == "cover":
        mask = r <= 1.0
    else:
        r = r / math.sqrt(2.0)
        darea /= 2.0
        mask = np.ones_like(r, dtype=bool)
    return r, theta, mask, darea


@lru_cache(maxsize=8)
def _basis(h: int, w: int, indices: tuple[tuple[int, int], ...], mode: str):
    """Projection kernels K such that Z = K @ image.ravel() per index."""
    r, theta, mask, darea = make_grid(h, w, mode)
    kernels = np.zeros((len(indices), h * w), dtype=np.complex128)
    for row, (m, n) in enumerate(indices):
        basis = radial_polynomial(m, n, r) * np.exp(-1j * n * theta)
        basis[~mask] = 0.0
        kernels[row] = (((m + 1) / math.pi) * darea * np.conj(basis)).ravel()
    return kernels


def zernike_moment(
    image: np.ndarray, m: int, n: int, mode: str = "cover"
) -> complex:
    """Single complex moment Z_mn of a 2-D image on the unit disk."""
    validate_index(m, n)
    img = _as_image(image)
    h, w = img.shape
    kernel = _basis(h, w, ((m, n),), mode)
    return complex(kernel[0] @ img.ravel())


def zernike_magnitudes(
    image: np.ndarray,
    indices: list[tuple[int, int]] | None = None,
    mode: str = "cover",
) -> np.ndarray:
    """Moment magnitudes |Z_mn| for each index pair, as float64.

    Magnitudes are invariant to image rotation about the disk center
    because rotation only shifts the phase of each Z_mn.
    """
    idx = tuple(indices) if indices is not None else tuple(default_indices())
    img = _as_image(image)
    h, w = img.shape
    kernels = _basis(h, w, idx, mode)
    return np.abs(kernels @ img.ravel())


def sequence_features(
    frames: list[np.ndarray] | np.ndarray,
    cfg: ZernikeConfig | None = None,
) -> np.ndarray:
    """Fixed-length visual feature vector for a clip of mask frames.

    The clip is resampled to ``cfg.n_frames`` frames by nearest index,
    then per-frame magnitude vectors are concatenated in time order.
    With the defaults this is 52 frames x 9 moments = 468 values.
    """
    cfg = cfg or ZernikeConfig()
    cfg.validate()
    if len(frames) == 0:
        raise ValueError("clip must contain at least one frame")
    idx = nearest_indices(len(frames), cfg.n_frames)
    parts = []
    cache: dict[int, np.ndarray] = {}
    for src in idx:
        src = int(src)
        if src not in cache:
            cache[src] = zernike_magnitudes(frames[src], cfg.indices, cfg.disk_mode)
        parts.append(cache[src])
    return np.concatenate(parts)


def _as_image(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    return img
