"""Closed-form analysis of local thresholding on an idealized 1-D square pulse.

A single pulse of amplitude A and width W sits on an exactly-zero background;
local statistics are taken over an n-sample window that contains the whole
pulse. Under those assumptions the local mean, local std, the resulting
threshold, and the largest detectable control parameter all have closed
forms, which the sweeps below tabulate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PulseModel:
    """Square pulse: amplitude, width in samples, local-window size."""

    amplitude: float
    width: int
    window: int

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if not (1 <= self.width < self.window):
            raise ValueError(
                f"need 1 <= width < window, got W={self.width}, n={self.window}")


def pulse_row(amplitude: float, width: int, length: int,
              offset: int | None = None) -> np.ndarray:
    """Zero row of ``length`` samples carrying one centered square pulse.

    The default offset floor((length - width) / 2) centers the pulse, which is
    the configuration the closed forms assume.
    """
    if not (1 <= width < length):
        raise ValueError(f"need 1 <= width < length, got W={width}, n={length}")
    if offset is None:
        offset = (length - width) // 2
    if offset < 0 or offset + width > length:
        raise ValueError("pulse does not fit the row")
    row = np.zeros(length, dtype=np.float64)
    row[offset:offset + width] = amplitude
    return row


def pulse_local_mean(p: PulseModel) -> float:
    """Window mean A*W/n when the window holds the full pulse."""
    return p.amplitude * p.width / p.window


def pulse_local_std(p: PulseModel) -> float:
    """Population window std (A/n) * sqrt(n*W - W^2) on a zero background."""
    return p.amplitude / p.window * math.sqrt(p.window * p.width - p.width ** 2)


def pulse_threshold(p: PulseModel, k: float) -> float:
    """Local statistics threshold mean + k * std in closed form."""
    if k < 0:
        raise ValueError("control parameter must be >= 0")
    return pulse_local_mean(p) + k * pulse_local_std(p)


def k_local_max(width: int, window: int) -> float:
    """Largest local control parameter that still detects a width-W pulse.

    Solving threshold == amplitude gives sqrt((n - W) / W); the amplitude
    cancels, so the bound depends only on the geometry.
    """
    if not (1 <= width < window):
        raise ValueError(f"need 1 <= width < window, got W={width}, n={window}")
    return math.sqrt((window - width) / width)


def sweep_k_local_max(window: int, widths=None) -> np.ndarray:
    """Tabulate (W, k_max) over a width range; strictly decreasing in W."""
    if widths is None:
        widths = range(1, window)
    rows = [(float(w), k_local_max(int(w), window)) for w in widths]
    return np.array(rows, dtype=np.float64)


def sweep_threshold_ratio(window: int, k_values, widths=None) -> np.ndarray:
    """Tabulate (W, k, T/A) over widths and control parameters.

    The target is detectable exactly where T/A < 1. The default width range
    stops at window / 2: that is the small-target regime the analysis is
    about, and the regime where T/A grows monotonically with W. Rows are
    ordered by W then k so the output is deterministic.
    """
    if widths is None:
        widths = range(1, window // 2 + 1)
    rows = []
    for w in widths:
        p = PulseModel(amplitude=1.0, width=int(w), window=window)
        for k in k_values:
            rows.append((float(w), float(k), pulse_threshold(p, float(k))))
    return np.array(rows, dtype=np.float64)
