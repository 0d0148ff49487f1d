"""Pre-thresholding quality metrics for saliency maps.

Local SCR compares the target against a surrounding background ring;
the global variant compares the target peak against whole-map statistics,
which also equals the largest global control parameter that still detects
the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imgcore import (GroundTruth, TargetRegion, as_gray, background_ring,
                      global_stats, region_stats)
from .pulse_theory import pulse_row

DEFAULT_RING_WIDTH = 20


class FlatBackgroundError(ValueError):
    """Background std is zero, so a clutter-relative ratio is undefined."""


@dataclass(frozen=True)
class PreMetrics:
    """One row of pre-thresholding metrics for an (image, saliency, target)."""

    scr_in: float
    scr_out: float
    bsf: float
    scrg: float
    scr_global: float


def scr_local(img, target: TargetRegion, ring_width: int = DEFAULT_RING_WIDTH) -> float:
    """(target mean - ring mean) / ring std on the target's background ring."""
    arr = as_gray(img)
    h, w = arr.shape
    ring = background_ring(target, ring_width, w, h)
    t = region_stats(arr, target)
    b = region_stats(arr, ring)
    if b.std == 0.0:
        raise FlatBackgroundError("background ring std is zero")
    return (t.mean - b.mean) / b.std


def bsf_scrg(input_img, saliency, target: TargetRegion,
             ring_width: int = DEFAULT_RING_WIDTH) -> tuple[float, float]:
    """Background-suppression and SCR-gain ratios on a shared ring geometry.

    Returns (bsf, scrg). Perfect suppression (zero output-ring std) is
    flagged with +inf rather than raised; an undefined input-side SCR is an
    error because no ratio can be formed.
    """
    inp = as_gray(input_img)
    sal = as_gray(saliency)
    if inp.shape != sal.shape:
        raise ValueError("input and saliency dimensions differ")
    h, w = inp.shape
    ring = background_ring(target, ring_width, w, h)
    b_in = region_stats(inp, ring)
    if b_in.std == 0.0:
        raise FlatBackgroundError("input background ring std is zero")
    scr_in = (region_stats(inp, target).mean - b_in.mean) / b_in.std
    if scr_in == 0.0:
        raise ValueError("input SCR is zero; gain ratio undefined")
    b_out = region_stats(sal, ring)
    if b_out.std == 0.0:
        return math.inf, math.inf
    bsf = b_in.std / b_out.std
    scr_out = (region_stats(sal, target).mean - b_out.mean) / b_out.std
    return bsf, scr_out / scr_in


def scr_global(saliency, gt: GroundTruth, target_index: int = 0) -> float:
    """(target peak - global mean) / global std of the saliency map.

    Numerically this is the largest control parameter k for which
    mean + k * std still sits below the target's brightest pixel, i.e. the
    detection bound of global statistics thresholding.
    """
    arr = as_gray(saliency)
    g = global_stats(arr)
    if g.std == 0.0:
        raise FlatBackgroundError("constant saliency map")
    target = gt.targets[target_index]
    ys, xs = target.indices()
    peak = float(arr[ys, xs].max())
    return (peak - g.mean) / g.std


@dataclass(frozen=True)
class TwoDetectorScenario:
    """Two single-pulse saliency rows and their global SCR values.

    ``row_1`` / ``row_2`` are the constructed 1-D maps (kept for follow-up
    thresholding experiments); the classical ring-based SCR is degenerate on
    the zero background, so ``classical_scr_1/2`` report the amplitude-over-
    sigma variant for a caller-supplied background std and stay None without
    one.
    """

    scr_global_1: float
    scr_global_2: float
    row_1: np.ndarray
    row_2: np.ndarray
    classical_scr_1: float | None = None
    classical_scr_2: float | None = None


def two_detector_scenario(a1: float, w1: int, a2: float, w2: int,
                          n: int = 33,
                          background_std: float | None = None) -> TwoDetectorScenario:
    """Compare two detector outputs idealized as centered pulses in zero rows.

    Both pulses live in identical zero 1-D backgrounds of length n. The
    returned global SCR values decide which detector survives a higher global
    threshold; a wide low pulse can lose to a narrow tall one even when its
    classical contrast looks better.
    """
    if w1 >= n or w2 >= n:
        raise ValueError("pulse width must be smaller than the row")
    row1 = pulse_row(a1, w1, n)
    row2 = pulse_row(a2, w2, n)
    gt1 = _row_gt(row1)
    gt2 = _row_gt(row2)
    s1 = scr_global(row1[None, :], gt1)
    s2 = scr_global(row2[None, :], gt2)
    c1 = c2 = None
    if background_std is not None:
        if background_std <= 0:
            raise ValueError("background std must be positive")
        c1 = a1 / background_std
        c2 = a2 / background_std
    return TwoDetectorScenario(scr_global_1=s1, scr_global_2=s2,
                               row_1=row1, row_2=row2,
                               classical_scr_1=c1, classical_scr_2=c2)


def _row_gt(row: np.ndarray) -> GroundTruth:
    """Ground truth marking the nonzero samples of a 1-D pulse row."""
    xs = np.flatnonzero(row)
    coords = np.column_stack([xs, np.zeros_like(xs)])
    return GroundTruth(targets=[TargetRegion.from_mask(coords)],
                       width=row.size, height=1)


def evaluate(input_img, saliency, gt: GroundTruth, target_index: int = 0,
             ring_width: int = DEFAULT_RING_WIDTH) -> PreMetrics:
    """Assemble the full pre-thresholding metrics row for one target.

    Perfect background suppression in the saliency map shows up as +inf in
    the ratio columns instead of aborting the row.
    """
    target = gt.targets[target_index]
    bsf, scrg = bsf_scrg(input_img, saliency, target, ring_width)
    try:
        scr_out = scr_local(saliency, target, ring_width)
    except FlatBackgroundError:
        scr_out = math.inf
    return PreMetrics(
        scr_in=scr_local(input_img, target, ring_width),
        scr_out=scr_out,
        bsf=bsf,
        scrg=scrg,
        scr_global=scr_global(saliency, gt, target_index),
    )
