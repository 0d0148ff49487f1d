import math

import numpy as np
import pytest

from irstdbench.imgcore import local_stats
from irstdbench.pulse_theory import (PulseModel, k_local_max, pulse_local_mean,
                                     pulse_local_std, pulse_row,
                                     pulse_threshold, sweep_k_local_max,
                                     sweep_threshold_ratio)
from irstdbench.thresholding import local_stat_threshold


def test_model_validation():
    with pytest.raises(ValueError):
        PulseModel(amplitude=0.0, width=1, window=9)
    with pytest.raises(ValueError):
        PulseModel(amplitude=1.0, width=9, window=9)
    with pytest.raises(ValueError):
        PulseModel(amplitude=1.0, width=0, window=9)


def test_local_mean_closed_form():
    assert pulse_local_mean(PulseModel(1.0, 3, 33)) == pytest.approx(3 / 33)
    n = 21
    assert pulse_local_mean(PulseModel(2.0, n - 1, n)) == pytest.approx(
        2.0 * (n - 1) / n)


def test_local_mean_matches_average_oracle():
    row = pulse_row(5.0, 4, 25)
    assert pulse_local_mean(PulseModel(5.0, 4, 25)) == pytest.approx(
        row.mean(), abs=1e-15)


def test_local_std_closed_form():
    assert pulse_local_std(PulseModel(1.0, 1, 2)) == pytest.approx(0.5)
    # nearly-full window: std collapses
    assert pulse_local_std(PulseModel(1.0, 99, 100)) < 0.1


def test_local_std_matches_population_oracle():
    for a, w, n in ((1.0, 3, 33), (7.0, 5, 17), (2.5, 1, 9)):
        row = pulse_row(a, w, n)
        assert pulse_local_std(PulseModel(a, w, n)) == pytest.approx(
            row.std(), abs=1e-12)


def test_threshold_closed_form():
    p = PulseModel(3.0, 4, 33)
    assert pulse_threshold(p, 0.0) == pytest.approx(pulse_local_mean(p))
    # at the detection bound the threshold touches the amplitude exactly
    k = k_local_max(4, 33)
    assert pulse_threshold(p, k) == pytest.approx(3.0, abs=1e-12)


def test_threshold_matches_pipeline_at_center():
    for a, w, n in ((1.0, 3, 33), (4.0, 2, 17)):
        row = pulse_row(a, w, n)[None, :]
        k = 1.7
        tmap = local_stat_threshold(row, k, n).threshold_map
        center = n // 2
        assert tmap[0, center] == pytest.approx(
            pulse_threshold(PulseModel(a, w, n), k), abs=1e-12)


def test_k_local_max_values():
    assert k_local_max(1, 33) == pytest.approx(math.sqrt(32), abs=1e-12)
    assert k_local_max(16, 17) == pytest.approx(0.25, abs=1e-12)
    n = 12
    assert k_local_max(n - 1, n) == pytest.approx(math.sqrt(1 / (n - 1)))
    with pytest.raises(ValueError):
        k_local_max(33, 33)


def test_k_local_max_monotonicity():
    for n in (9, 17, 33):
        ks = [k_local_max(w, n) for w in range(1, n)]
        assert all(a > b for a, b in zip(ks, ks[1:]))
    for w in (1, 4, 8):
        assert k_local_max(w, 17) < k_local_max(w, 33)


def test_sweep_k_local_max_table():
    table = sweep_k_local_max(33)
    assert table.shape == (32, 2)
    assert table[0, 1] == pytest.approx(5.656854, abs=1e-6)
    assert table[-1, 1] == pytest.approx(0.176777, abs=1e-6)
    assert np.all(np.diff(table[:, 1]) < 0)


def test_sweep_threshold_ratio_table():
    table = sweep_threshold_ratio(33, (0.0, 2.0))
    # k = 0 rows reduce to W/n
    k0 = table[table[:, 1] == 0.0]
    assert np.allclose(k0[:, 2], k0[:, 0] / 33.0)
    # T/A increases with W for k > 0
    k2 = table[table[:, 1] == 2.0]
    assert np.all(np.diff(k2[:, 2]) > 0)
    # T/A = 1 exactly where k equals the width's detection bound
    w = 4
    t = pulse_threshold(PulseModel(1.0, w, 33), k_local_max(w, 33))
    assert t == pytest.approx(1.0, abs=1e-12)


def test_detection_boundary_grid():
    # pipeline detection flips exactly at the closed-form bound
    for n in (17, 33):
        for w in range(1, 6):
            bound = k_local_max(w, n)
            row = pulse_row(1.0, w, n)[None, :]
            pulse = row[0] > 0
            below = local_stat_threshold(row, bound - 1e-7, n).binary
            above = local_stat_threshold(row, bound + 1e-7, n).binary
            assert below[0, pulse].all(), (w, n)
            assert not above[0, pulse].any(), (w, n)


def test_closed_forms_match_pipeline_stats():
    for n in (17, 33):
        for w in range(1, 9):
            row = pulse_row(1.0, w, n)[None, :]
            mean_map, std_map = local_stats(row, n)
            center = n // 2
            p = PulseModel(1.0, w, n)
            assert mean_map[0, center] == pytest.approx(pulse_local_mean(p),
                                                        abs=1e-12)
            assert std_map[0, center] == pytest.approx(pulse_local_std(p),
                                                       abs=1e-12)
