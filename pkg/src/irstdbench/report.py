"""Figure rendering for the report-producing CLI paths.

Plots are written straight to files next to the delimited output. Saving is
kept deterministic (fixed backend, size, dpi, and metadata) so report
bundles can be diffed byte-for-byte.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"dpi": 120, "metadata": {"Software": "irstdbench"}}


def _save(fig, path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_pfa_k_figure(path, curves, labels, title: str = "") -> None:
    """Overlay normalized Pfa-k curves on a logarithmic false-alarm axis.

    Zero-pfa samples have no logarithmic image and are left out by the log
    scale; the CSVs keep the raw values.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for curve, label in zip(curves, labels):
        ax.semilogy(curve.k_norm, curve.pfa, label=label, linewidth=1.4)
    ax.set_xlabel("normalized control parameter k / k_max")
    ax.set_ylabel("false-alarm rate")
    ax.set_xlim(0.0, 1.0)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_roc_figure(path, curve, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.plot(curve.pfa, curve.pd, marker=".", linewidth=1.4)
    ax.set_xlabel("false-alarm rate")
    ax.set_ylabel("detection rate")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_k_local_max_figure(path, rows, window: int) -> None:
    """Largest detectable local control parameter versus pulse width."""
    rows = np.asarray(rows)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.plot(rows[:, 0], rows[:, 1], marker="o", markersize=3, linewidth=1.4)
    ax.set_xlabel("target width W (samples)")
    ax.set_ylabel("largest detectable k")
    ax.set_title(f"local-threshold detection bound, window n={window}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_threshold_ratio_figure(path, rows, window: int) -> None:
    """Normalized local threshold T/A versus width, one line per k.

    Detection requires T/A < 1; the unit line is drawn for reference.
    """
    rows = np.asarray(rows)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for k in np.unique(rows[:, 1]):
        sel = rows[rows[:, 1] == k]
        ax.plot(sel[:, 0], sel[:, 2], linewidth=1.4, label=f"k={k:g}")
    ax.axhline(1.0, color="black", linestyle="--", linewidth=1.0)
    ax.set_xlabel("target width W (samples)")
    ax.set_ylabel("threshold / amplitude")
    ax.set_title(f"local threshold vs width, window n={window}")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
