"""Baseline small-target detectors: each maps a grayscale frame to a saliency map.

All four filters use replicate border padding and return a map with the same
shape as the input. Multi-scale detectors fuse scales with a per-pixel max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import convolve, grey_opening, uniform_filter

from .imgcore import as_gray

DEFAULT_TOPHAT_SE = 7
DEFAULT_LOG_SCALES = (0.50, 0.60, 0.72, 0.86, 1.03, 1.24, 1.49, 1.79,
                      2.14, 2.57, 3.09, 3.71)
DEFAULT_CELL_SIZES = (3, 5, 7, 9)


@dataclass
class DetectorConfig:
    """Tunable parameters of the four baseline detectors."""

    tophat_se: int = DEFAULT_TOPHAT_SE
    log_scales: tuple[float, ...] = DEFAULT_LOG_SCALES
    cell_sizes: tuple[int, ...] = DEFAULT_CELL_SIZES

    def __post_init__(self):
        if self.tophat_se % 2 == 0 or self.tophat_se < 3:
            raise ValueError("structuring element side must be odd and >= 3")
        scales = tuple(float(s) for s in self.log_scales)
        if not scales or any(s <= 0 for s in scales):
            raise ValueError("scales must be positive")
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ValueError("scales must be strictly increasing")
        cells = tuple(int(c) for c in self.cell_sizes)
        if not cells or any(c % 2 == 0 or c < 3 for c in cells):
            raise ValueError("cell sizes must be odd and >= 3")
        self.log_scales = scales
        self.cell_sizes = cells


def tophat(img, se: int = DEFAULT_TOPHAT_SE) -> np.ndarray:
    """White top-hat: image minus its grayscale opening with a flat square SE.

    Extracts bright structures smaller than the structuring element; the
    result is >= 0 everywhere because opening is anti-extensive.
    """
    if se % 2 == 0 or se < 3:
        raise ValueError(f"structuring element side must be odd and >= 3, got {se}")
    arr = as_gray(img)
    opened = grey_opening(arr, size=(se, se), mode="nearest")
    return arr - opened


def log_kernel(sigma: float) -> np.ndarray:
    """Scale-normalized, negated Laplacian-of-Gaussian kernel.

    Truncated at radius ceil(3*sigma) and recentered so it sums to zero;
    bright blobs of matching size produce positive responses.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    r = math.ceil(3.0 * sigma)
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    r2 = xx * xx + yy * yy
    s2 = sigma * sigma
    kern = (2.0 * s2 - r2) / (2.0 * math.pi * s2 * s2) * np.exp(-r2 / (2.0 * s2))
    return kern - kern.mean()


def log_multiscale(img, scales=DEFAULT_LOG_SCALES) -> np.ndarray:
    """Per-pixel maximum of scale-normalized blob responses over the scale list."""
    scales = tuple(scales)
    if not scales:
        raise ValueError("scale list is empty")
    arr = as_gray(img)
    out = None
    for sigma in scales:
        resp = convolve(arr, log_kernel(sigma), mode="nearest")
        out = resp if out is None else np.maximum(out, resp)
    return out


def _patch_means(arr: np.ndarray, cell: int) -> tuple[np.ndarray, int]:
    """Cell means of the replicate-padded frame, evaluated on a grid that
    extends one cell beyond every image border (for the shifted lookups)."""
    pad = cell + cell // 2
    padded = np.pad(arr, pad, mode="edge")
    return uniform_filter(padded, size=cell, mode="nearest"), pad


def pcm(img, cell_sizes=DEFAULT_CELL_SIZES) -> np.ndarray:
    """Patch contrast measure with a 3x3 grid of square cells per scale.

    For each pixel the center-cell mean is compared against the eight
    surrounding cell means; the response is the minimum over the four
    opposing-pair products of the differences, so a pixel scores high only
    when it beats both sides of every axis. Negative values are preserved.
    """
    cells = tuple(int(c) for c in cell_sizes)
    if not cells:
        raise ValueError("cell-size list is empty")
    if any(c % 2 == 0 or c < 3 for c in cells):
        raise ValueError("cell sizes must be odd and >= 3")
    arr = as_gray(img)
    h, w = arr.shape
    # ring order: NW N NE E SE S SW W, so index i and i+4 are opposite cells
    ring = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))
    out = None
    for s in cells:
        means, pad = _patch_means(arr, s)
        center = means[pad:pad + h, pad:pad + w]
        diffs = []
        for dy, dx in ring:
            oy, ox = pad + dy * s, pad + dx * s
            diffs.append(center - means[oy:oy + h, ox:ox + w])
        contrast = np.minimum.reduce([diffs[i] * diffs[i + 4] for i in range(4)])
        out = contrast if out is None else np.maximum(out, contrast)
    return out


def aagd(img, cell_sizes=DEFAULT_CELL_SIZES) -> np.ndarray:
    """Absolute average gray difference with square center cell and surround frame.

    Per scale s: the mean of the s x s center cell minus the mean of the
    width-s frame around it, squared when positive and clamped to zero
    otherwise (bright-over-background only); scales fuse by per-pixel max.
    """
    cells = tuple(int(c) for c in cell_sizes)
    if not cells:
        raise ValueError("cell-size list is empty")
    if any(c % 2 == 0 or c < 3 for c in cells):
        raise ValueError("cell sizes must be odd and >= 3")
    arr = as_gray(img)
    out = None
    for s in cells:
        m_in = uniform_filter(arr, size=s, mode="nearest")
        m_all = uniform_filter(arr, size=3 * s, mode="nearest")
        m_out = (9.0 * m_all - m_in) / 8.0
        d = m_in - m_out
        resp = np.where(d > 0.0, d * d, 0.0)
        out = resp if out is None else np.maximum(out, resp)
    return out


def identity(img) -> np.ndarray:
    """Pass-through 'detector' used as an evaluation baseline."""
    return as_gray(img).copy()


DETECTORS = ("tophat", "log", "pcm", "aagd")


def run(name: str, img, config: DetectorConfig | None = None) -> np.ndarray:
    """Dispatch a detector by name ('tophat', 'log', 'pcm', 'aagd', 'identity')."""
    cfg = config or DetectorConfig()
    if name == "tophat":
        return tophat(img, cfg.tophat_se)
    if name == "log":
        return log_multiscale(img, cfg.log_scales)
    if name == "pcm":
        return pcm(img, cfg.cell_sizes)
    if name == "aagd":
        return aagd(img, cfg.cell_sizes)
    if name == "identity":
        return identity(img)
    raise ValueError(f"unknown detector {name!r}")
