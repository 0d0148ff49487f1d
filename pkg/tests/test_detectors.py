import numpy as np
import pytest

import oracles
from irstdbench import detectors
from irstdbench.detectors import (DetectorConfig, aagd, identity, log_kernel,
                                  log_multiscale, pcm, tophat)
from irstdbench.imgcore import dilate_coords


def test_config_defaults_match_published_setup():
    cfg = DetectorConfig()
    assert cfg.tophat_se == 7
    assert cfg.log_scales == (0.50, 0.60, 0.72, 0.86, 1.03, 1.24, 1.49, 1.79,
                              2.14, 2.57, 3.09, 3.71)
    assert cfg.cell_sizes == (3, 5, 7, 9)


def test_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(tophat_se=6)
    with pytest.raises(ValueError):
        DetectorConfig(log_scales=(1.0, 0.5))
    with pytest.raises(ValueError):
        DetectorConfig(log_scales=())
    with pytest.raises(ValueError):
        DetectorConfig(cell_sizes=(4,))


# ---------------------------------------------------------------------------
# top-hat
# ---------------------------------------------------------------------------

def test_tophat_constant_is_zero():
    assert np.array_equal(tophat(np.full((10, 10), 9.0), 7), np.zeros((10, 10)))


def test_tophat_isolated_peak():
    img = np.zeros((15, 15))
    img[7, 7] = 42.0
    out = tophat(img, 7)
    assert out[7, 7] == 42.0
    out[7, 7] = 0.0
    assert np.array_equal(out, np.zeros_like(img))


def test_tophat_removes_wide_plateau():
    img = np.zeros((20, 20))
    img[4:15, 4:16] = 10.0    # 11x12 plateau, larger than the 7x7 element
    out = tophat(img, 7)
    assert np.allclose(out[7:12, 7:13], 0.0)
    assert np.array_equal(out, oracles.tophat(img, 7))


def test_tophat_anti_extensive_bounds():
    rng = np.random.default_rng(21)
    img = rng.uniform(0, 50, size=(12, 12))
    out = tophat(img, 5)
    assert np.all(out >= 0)
    assert np.all(out <= img - oracles.erode(img, 5) + 1e-12)


def test_tophat_rejects_even_se():
    with pytest.raises(ValueError):
        tophat(np.zeros((4, 4)), 4)


# ---------------------------------------------------------------------------
# multiscale blob filter
# ---------------------------------------------------------------------------

def test_log_kernel_zero_sum():
    for sigma in (0.5, 1.03, 3.71):
        assert abs(log_kernel(sigma).sum()) < 1e-15


def test_log_constant_near_zero():
    out = log_multiscale(np.full((9, 9), 7.0))
    assert np.all(np.abs(out) < 1e-9)


def test_log_single_scale_matches_convolution_oracle():
    rng = np.random.default_rng(22)
    img = rng.uniform(0, 30, size=(10, 10))
    out = log_multiscale(img, scales=(1.2,))
    ref = oracles.convolve(img, log_kernel(1.2))
    assert np.allclose(out, ref, rtol=1e-9, atol=1e-9)


def test_log_scale_selection_on_gaussian_blob():
    # per-pixel max at the blob center is reached at the scale closest to the
    # blob spread
    t = 1.5
    yy, xx = np.mgrid[0:31, 0:31].astype(float)
    blob = 100.0 * np.exp(-((xx - 15) ** 2 + (yy - 15) ** 2) / (2 * t * t))
    scales = (0.8, 1.2, 1.6, 2.4)
    responses = [log_multiscale(blob, scales=(s,))[15, 15] for s in scales]
    assert int(np.argmax(responses)) == scales.index(1.6)
    fused = log_multiscale(blob, scales=scales)
    assert fused[15, 15] == pytest.approx(max(responses), rel=1e-12)


def test_log_empty_scales_raises():
    with pytest.raises(ValueError):
        log_multiscale(np.zeros((4, 4)), scales=())


# ---------------------------------------------------------------------------
# patch contrast
# ---------------------------------------------------------------------------

def test_pcm_constant_is_zero():
    assert np.allclose(pcm(np.full((12, 12), 4.0), (3,)), 0.0, atol=1e-12)


def test_pcm_bright_square_positive_at_center():
    img = np.zeros((21, 21))
    img[9:12, 9:12] = 50.0    # 3x3 square exactly fills the center patch
    out = pcm(img, (3,))
    assert out[10, 10] > 0


def test_pcm_checkerboard_matches_oracle():
    s = 3
    tiles = np.indices((9, 9)).sum(axis=0) % 2
    img = np.kron(tiles, np.ones((s, s))) * 10.0
    out = pcm(img, (s,))
    ref = oracles.pcm_single_scale(img, s)
    assert np.allclose(out, ref, rtol=1e-9, atol=1e-9)
    assert np.sign(out[13, 13]) == np.sign(ref[13, 13])


def test_pcm_preserves_negative_values():
    # a step edge beats one side and loses to the other: product is negative
    img = np.zeros((15, 15))
    img[:, 8:] = 20.0
    out = pcm(img, (3,))
    assert out.min() < 0


def test_pcm_random_matches_oracle():
    rng = np.random.default_rng(23)
    img = rng.uniform(-5, 25, size=(11, 13))
    for s in (3, 5):
        assert np.allclose(pcm(img, (s,)), oracles.pcm_single_scale(img, s),
                           rtol=1e-9, atol=1e-9)


# ---------------------------------------------------------------------------
# average gray difference
# ---------------------------------------------------------------------------

def test_aagd_constant_is_zero():
    assert np.allclose(aagd(np.full((12, 12), 4.0), (3,)), 0.0, atol=1e-12)


def test_aagd_single_pixel_closed_form():
    img = np.zeros((21, 21))
    img[10, 10] = 63.0
    out = aagd(img, (3,))
    assert out[10, 10] == pytest.approx((63.0 / 9) ** 2, rel=1e-12)


def test_aagd_dark_hole_clamped_to_zero():
    img = np.full((15, 15), 30.0)
    img[7, 7] = 0.0
    out = aagd(img, (3,))
    assert out[7, 7] == 0.0


def test_aagd_random_matches_oracle():
    rng = np.random.default_rng(24)
    img = rng.uniform(0, 40, size=(12, 10))
    for s in (3, 5):
        assert np.allclose(aagd(img, (s,)), oracles.aagd_single_scale(img, s),
                           rtol=1e-9, atol=1e-9)


# ---------------------------------------------------------------------------
# shared properties
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("run,margin", [
    (lambda im: tophat(im, 5), 4),
    (lambda im: log_multiscale(im, scales=(1.5,)), 7),
    (lambda im: pcm(im, (3,)), 6),
    (lambda im: aagd(im, (3,)), 6),
])
def test_translation_equivariance_interior(run, margin):
    rng = np.random.default_rng(25)
    img = rng.uniform(0, 20, size=(48, 48))
    dy, dx = 2, 3
    shifted = np.roll(img, (dy, dx), axis=(0, 1))
    out, out_s = run(img), run(shifted)
    m = margin + max(dy, dx)
    inner = out[m:48 - m - dy, m:48 - m - dx]
    inner_s = out_s[m + dy:48 - m, m + dx:48 - m]
    assert np.allclose(inner, inner_s, rtol=1e-9, atol=1e-9)


def test_detector_sanity_on_suite(suite, suite_maps):
    # each detector responds strongest at the target on every suite scene
    for i, scene in enumerate(suite):
        if not scene.gt.targets:
            continue
        zone = np.zeros(scene.image.shape, dtype=bool)
        for t in scene.gt.targets:
            d = dilate_coords(t.mask, 1, scene.gt.width, scene.gt.height)
            zone[d[:, 1], d[:, 0]] = True
        for algo in detectors.DETECTORS:
            sal = suite_maps[(i, algo)]
            assert sal[zone].max() > sal[~zone].max(), (scene.spec.name, algo)


def test_identity_and_dispatch():
    rng = np.random.default_rng(26)
    img = rng.uniform(0, 9, size=(6, 6))
    assert np.array_equal(identity(img), img)
    assert np.array_equal(detectors.run("tophat", img), tophat(img, 7))
    with pytest.raises(ValueError):
        detectors.run("nope", img)
