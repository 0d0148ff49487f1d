"""Post-thresholding evaluation: confusion counts, ROC, and the Pfa-k curve.

The Pfa-k curve sweeps the global-threshold control parameter from zero up to
the largest value that still detects every target, records the false-alarm
rate at each step, and normalizes the abscissa to [0, 1] so curves from
detectors with wildly different dynamic ranges share one plot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imgcore import GroundTruth, as_gray, dilate_coords, global_stats
from .metrics_pre import scr_global
from .thresholding import global_stat_threshold, threshold_fixed

DEFAULT_TOLERANCE = 1
DEFAULT_SAMPLES = 512


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel-level detection bookkeeping against ground truth."""

    n_f: int      # detected pixels outside every (dilated) target
    n_tot: int    # total pixels in the frame
    n_d: int      # detected pixels inside a target mask
    n_r: int      # target pixels in the ground truth

    @property
    def pfa(self) -> float:
        return self.n_f / self.n_tot

    @property
    def pd(self) -> float:
        if self.n_r == 0:
            raise ValueError("pixel detection rate undefined without target pixels")
        return self.n_d / self.n_r


@dataclass
class RocCurve:
    """(pfa, pd) samples ordered by descending threshold."""

    thresholds: np.ndarray
    pfa: np.ndarray
    pd: np.ndarray


@dataclass
class PfaKCurve:
    """False-alarm rate versus normalized global control parameter."""

    k_max: float
    k_norm: np.ndarray
    pfa: np.ndarray

    @property
    def pfa_min(self) -> float:
        return float(self.pfa[-1])


def _zones(gt: GroundTruth, tolerance: int) -> tuple[np.ndarray, np.ndarray]:
    """Boolean rasters: union of target masks, union of dilated masks."""
    in_mask = gt.mask_image()
    if tolerance <= 0:
        return in_mask, in_mask
    in_dilated = np.zeros_like(in_mask)
    for t in gt.targets:
        dil = dilate_coords(t.mask, tolerance, gt.width, gt.height)
        in_dilated[dil[:, 1], dil[:, 0]] = True
    return in_mask, in_dilated


def pixel_confusion(binary, gt: GroundTruth,
                    tolerance: int = DEFAULT_TOLERANCE) -> ConfusionCounts:
    """Count detected pixels against ground truth with a blurred-edge margin.

    A detection inside a target mask is a hit; one outside every mask dilated
    by ``tolerance`` is a false pixel; detections in the dilation margin count
    toward neither (target edges are blurred, so near-misses are not
    penalized). ``tolerance=0`` gives the strict accounting.
    """
    b = np.asarray(binary, dtype=bool)
    if b.shape != (gt.height, gt.width):
        raise ValueError(
            f"binary shape {b.shape} does not match ground truth "
            f"{(gt.height, gt.width)}")
    in_mask, in_dilated = _zones(gt, tolerance)
    return ConfusionCounts(
        n_f=int(np.count_nonzero(b & ~in_dilated)),
        n_tot=int(b.size),
        n_d=int(np.count_nonzero(b & in_mask)),
        n_r=gt.total_target_pixels(),
    )


def target_pd(binary, gt: GroundTruth) -> float:
    """Fraction of targets with at least one detected pixel inside their mask."""
    b = np.asarray(binary, dtype=bool)
    if b.shape != (gt.height, gt.width):
        raise ValueError("binary dimensions do not match ground truth")
    if not gt.targets:
        raise ValueError("target detection rate undefined for target-free truth")
    hit = 0
    for t in gt.targets:
        ys, xs = t.indices()
        if b[ys, xs].any():
            hit += 1
    return hit / len(gt.targets)


def roc_curve(saliency, gt: GroundTruth, thresholds,
              pd_mode: str = "pixel",
              tolerance: int = DEFAULT_TOLERANCE) -> RocCurve:
    """One (pfa, pd) point per threshold, thresholds strictly descending."""
    tvals = np.asarray(thresholds, dtype=np.float64)
    if tvals.size < 2:
        raise ValueError("need at least 2 thresholds")
    if not np.all(np.diff(tvals) < 0):
        raise ValueError("thresholds must be strictly descending")
    if pd_mode not in ("pixel", "target"):
        raise ValueError(f"unknown pd mode {pd_mode!r}")
    arr = as_gray(saliency)
    pfa, pd = [], []
    for t in tvals:
        binary = threshold_fixed(arr, float(t)).binary
        counts = pixel_confusion(binary, gt, tolerance)
        pfa.append(counts.pfa)
        pd.append(counts.pd if pd_mode == "pixel" else target_pd(binary, gt))
    return RocCurve(thresholds=tvals, pfa=np.array(pfa), pd=np.array(pd))


def k_upper_bound(saliency, gt: GroundTruth, combine: str = "min") -> float:
    """Largest useful control parameter for a map with ground truth.

    Per target this is the global SCR of its brightest pixel; multi-target
    frames combine per-target bounds with ``min`` by default so the bound
    keeps every target detectable (``max`` / ``mean`` available for
    sensitivity studies).
    """
    if not gt.targets:
        raise ValueError("ground truth has no targets")
    per_target = [scr_global(saliency, gt, i) for i in range(len(gt.targets))]
    if combine == "min":
        return min(per_target)
    if combine == "max":
        return max(per_target)
    if combine == "mean":
        return float(np.mean(per_target))
    raise ValueError(f"unknown combine mode {combine!r}")


def pfa_k_curve(saliency, gt: GroundTruth, n_samples: int = DEFAULT_SAMPLES,
                combine: str = "min",
                tolerance: int = DEFAULT_TOLERANCE) -> PfaKCurve:
    """False-alarm rate over n_samples uniform control parameters in [0, k_max].

    Uniform sampling (rather than percentiles) keeps the normalized abscissa
    comparable across detectors.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 curve samples")
    arr = as_gray(saliency)
    k_max = k_upper_bound(arr, gt, combine)
    k_values = np.linspace(0.0, k_max, n_samples)
    pfa = np.empty(n_samples)
    for i, k in enumerate(k_values):
        binary = global_stat_threshold(arr, float(k)).binary
        pfa[i] = pixel_confusion(binary, gt, tolerance).pfa
    k_norm = k_values / k_max if k_max > 0 else np.linspace(0.0, 1.0, n_samples)
    return PfaKCurve(k_max=k_max, k_norm=k_norm, pfa=pfa)


def false_alarm_sweep(saliency, n_samples: int = DEFAULT_SAMPLES,
                      tolerance: int = DEFAULT_TOLERANCE,
                      gt: GroundTruth | None = None) -> PfaKCurve:
    """Pfa-vs-k sweep for target-free frames.

    Without targets there is no detection bound, so the sweep runs up to the
    control parameter of the brightest pixel (beyond which nothing survives).
    Statistics-based thresholding is expected to drive this to zero quickly,
    which is what makes it usable on empty scenes.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 curve samples")
    arr = as_gray(saliency)
    g = global_stats(arr)
    if g.std == 0.0:
        raise ValueError("constant saliency map")
    if gt is None:
        gt = GroundTruth(targets=[], width=arr.shape[1], height=arr.shape[0])
    k_top = (float(arr.max()) - g.mean) / g.std
    k_values = np.linspace(0.0, k_top, n_samples)
    pfa = np.empty(n_samples)
    for i, k in enumerate(k_values):
        binary = global_stat_threshold(arr, float(k)).binary
        pfa[i] = pixel_confusion(binary, gt, tolerance).pfa
    k_norm = k_values / k_top if k_top > 0 else np.linspace(0.0, 1.0, n_samples)
    return PfaKCurve(k_max=k_top, k_norm=k_norm, pfa=pfa)


@dataclass
class CurveComparison:
    """Side-by-side summary of several Pfa-k curves."""

    labels: list[str]
    k_max: list[float]
    pfa_min: list[float]
    grid: np.ndarray                       # shared normalized abscissa
    pfa: np.ndarray                        # one row per label on the grid
    relations: list[tuple[str, str, str]]  # (label_a, label_b, relation)

    def table_rows(self):
        return list(zip(self.labels, self.k_max, self.pfa_min))


def compare_curves(curves: list[PfaKCurve], labels: list[str]) -> CurveComparison:
    """Overlay curves on a common normalized grid and rank the summary metrics.

    Pairwise relations: 'identical' for equal curves, '<label> dominates' when
    one curve's pfa is strictly lower at every grid point, 'mixed' otherwise.
    """
    if len(curves) < 2:
        raise ValueError("need at least 2 curves to compare")
    if len(curves) != len(labels):
        raise ValueError("one label per curve required")
    grid = max((c.k_norm for c in curves), key=len)
    mat = np.vstack([np.interp(grid, c.k_norm, c.pfa) for c in curves])
    relations = []
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            a, b = mat[i], mat[j]
            if np.array_equal(a, b):
                rel = "identical"
            elif np.all(a < b):
                rel = f"{labels[i]} dominates"
            elif np.all(b < a):
                rel = f"{labels[j]} dominates"
            else:
                rel = "mixed"
            relations.append((labels[i], labels[j], rel))
    return CurveComparison(
        labels=list(labels),
        k_max=[c.k_max for c in curves],
        pfa_min=[c.pfa_min for c in curves],
        grid=grid.copy(),
        pfa=mat,
        relations=relations,
    )
