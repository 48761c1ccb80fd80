"""Nearest-index temporal resampling shared by the visual and audio front ends."""

import numpy as np


def nearest_indices(n_src: int, n_dst: int) -> np.ndarray:
    """Map ``n_dst`` output slots onto source indices by nearest center.

    Output slot t samples source index floor((t + 0.5) * n_src / n_dst),
    clipped to the valid range. Identity when n_src == n_dst; duplicates
    or drops frames evenly otherwise. Deterministic and order-preserving.
    """
    if n_src < 1 or n_dst < 1:
        raise ValueError("resampling needs at least one source and one target slot")
    idx = np.floor((np.arange(n_dst) + 0.5) * n_src / n_dst).astype(np.int64)
    return np.clip(idx, 0, n_src - 1)
