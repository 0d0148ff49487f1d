"""Benchmark toolkit for infrared small target detection.

Baseline detectors, saliency-map thresholding strategies, pre- and
post-thresholding detection-ability metrics, and a deterministic synthetic
scene generator that makes the whole pipeline testable at desk scale.
"""

from .detectors import DetectorConfig, aagd, log_multiscale, pcm, tophat
from .imgcore import (BinaryImage, GrayImage, GroundTruth, RegionStats,
                      TargetRegion, background_ring, global_stats, load_gray,
                      local_stats, region_stats, save_gray)
from .metrics_post import (ConfusionCounts, PfaKCurve, RocCurve,
                           compare_curves, false_alarm_sweep, pfa_k_curve,
                           pixel_confusion, roc_curve, target_pd)
from .metrics_pre import (PreMetrics, bsf_scrg, scr_global, scr_local,
                          two_detector_scenario)
from .pulse_theory import (PulseModel, k_local_max, pulse_local_mean,
                           pulse_local_std, pulse_threshold,
                           sweep_k_local_max, sweep_threshold_ratio)
from .synthgen import Scene, SceneSpec, render, standard_suite
from .thresholding import (ThresholdOutcome, global_stat_threshold,
                           iterative_mean_threshold, local_stat_threshold,
                           otsu_threshold, threshold_fixed)

__version__ = "0.1.0"
