"""Saliency-map binarization strategies.

Every strategy produces a ThresholdOutcome whose binary raster marks pixels
strictly above the threshold (ties go to background).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .imgcore import as_gray, global_stats, local_stats

ITER_MEAN_MAX_STEPS = 1000


class ConvergenceError(RuntimeError):
    """Iterative threshold search failed to settle within the step cap."""


@dataclass
class ThresholdOutcome:
    """Binary raster plus the threshold that produced it.

    Global strategies fill ``threshold``; the local strategy fills
    ``threshold_map`` instead.
    """

    binary: np.ndarray
    strategy: str
    threshold: float | None = None
    threshold_map: np.ndarray | None = None


def threshold_fixed(saliency, t: float) -> ThresholdOutcome:
    """Mark pixels strictly above a fixed global threshold."""
    arr = as_gray(saliency)
    return ThresholdOutcome(binary=arr > t, strategy="fixed", threshold=float(t))


def otsu_threshold(saliency, bins: int = 256) -> float:
    """Histogram threshold maximizing between-class variance.

    The histogram spans [min, max] of the map so arbitrary dynamic ranges
    work. Returns the upper edge of the last bin assigned to the background
    class; among ties the lowest qualifying edge wins.
    """
    if bins < 2:
        raise ValueError("need at least 2 histogram bins")
    arr = as_gray(saliency)
    lo, hi = float(arr.min()), float(arr.max())
    if hi <= lo:
        raise ValueError("constant map has no valid split")
    hist, edges = np.histogram(arr, bins=bins, range=(lo, hi))
    hist = hist.astype(np.float64)
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = hist.sum()
    cum_n = np.cumsum(hist)
    cum_s = np.cumsum(hist * centers)
    best_score, best_k = -1.0, None
    for k in range(bins - 1):
        n0 = cum_n[k]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = cum_s[k] / n0
        mu1 = (cum_s[-1] - cum_s[k]) / n1
        score = (n0 / total) * (n1 / total) * (mu1 - mu0) ** 2
        if score > best_score:
            best_score, best_k = score, k
    if best_k is None:
        raise ValueError("degenerate histogram: every split leaves a class empty")
    return float(edges[best_k + 1])


def iterative_mean_threshold(saliency, epsilon: float = 0.5,
                             max_steps: int = ITER_MEAN_MAX_STEPS) -> float:
    """Fixed-point threshold: repeatedly average the two class means.

    Starts from the global mean; each step reclassifies by the current
    threshold and moves it to the midpoint of the class means, stopping once
    the update is <= epsilon.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    arr = as_gray(saliency)
    vals = arr.ravel()
    if vals.max() <= vals.min():
        raise ValueError("constant map has no valid split")
    t = float(vals.mean())
    for _ in range(max_steps):
        upper = vals[vals > t]
        lower = vals[vals <= t]
        if upper.size == 0 or lower.size == 0:
            warnings.warn("class emptied during iterative-mean threshold search; "
                          "returning last valid threshold", RuntimeWarning)
            return t
        t_new = 0.5 * (float(upper.mean()) + float(lower.mean()))
        if abs(t_new - t) <= epsilon:
            return t_new
        t = t_new
    raise ConvergenceError(
        f"iterative-mean threshold did not converge in {max_steps} steps")


def global_stat_threshold(saliency, k: float) -> ThresholdOutcome:
    """Threshold at global mean + k * global std."""
    if not np.isfinite(k):
        raise ValueError("control parameter must be finite")
    arr = as_gray(saliency)
    stats = global_stats(arr)
    t = stats.mean + float(k) * stats.std
    return ThresholdOutcome(binary=arr > t, strategy="global-k", threshold=t)


def local_stat_threshold(saliency, k: float, n_side: int) -> ThresholdOutcome:
    """Per-pixel threshold at local mean + k * local std over an odd window."""
    arr = as_gray(saliency)
    mean_map, std_map = local_stats(arr, n_side)
    tmap = mean_map + float(k) * std_map
    return ThresholdOutcome(binary=arr > tmap, strategy="local-k",
                            threshold_map=tmap)


def apply_strategy(name: str, saliency, *, t: float = 0.0, k: float = 3.0,
                   window: int = 33, bins: int = 256,
                   epsilon: float = 0.5) -> ThresholdOutcome:
    """Dispatch a thresholding strategy by CLI name."""
    if name == "fixed":
        return threshold_fixed(saliency, t)
    if name == "otsu":
        thr = otsu_threshold(saliency, bins)
        out = threshold_fixed(saliency, thr)
        out.strategy = "otsu"
        return out
    if name == "itermean":
        thr = iterative_mean_threshold(saliency, epsilon)
        out = threshold_fixed(saliency, thr)
        out.strategy = "itermean"
        return out
    if name == "global-k":
        return global_stat_threshold(saliency, k)
    if name == "local-k":
        return local_stat_threshold(saliency, k, window)
    raise ValueError(f"unknown thresholding strategy {name!r}")
