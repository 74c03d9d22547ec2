"""Tests for the full-reference metrics and the SI / CF content descriptors."""

import math

import numpy as np
import pytest

from src.modules.errors import ArgumentError
from src.modules.frmetrics import (
    FullReferenceEvaluator,
    colorfulness,
    content_descriptors,
    cpp_psnr,
    craster_grid,
    psnr,
    s_psnr,
    spatial_information,
    ssim,
    ssim_map,
    ws_psnr,
    ws_ssim,
)
from src.modules.frmetrics.utils import LatitudeWeightMap, erp_row_weights, generate_metric_summary
from src.modules.geometry import ErpImage


def naive_ws_mse(ref: np.ndarray, dist: np.ndarray) -> float:
    h, w, c = ref.shape
    num = den = 0.0
    for j in range(h):
        weight = math.cos((j + 0.5 - h / 2) * math.pi / h)
        for i in range(w):
            for k in range(c):
                num += weight * (ref[j, i, k] - dist[j, i, k]) ** 2
                den += weight
    return num / den


def naive_sobel_si(gray: np.ndarray) -> float:
    h, w = gray.shape
    padded = np.pad(gray, 1, mode='edge')
    smooth = (1.0, 2.0, 1.0)
    magnitudes = []
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            gx = gy = 0.0
            for d in range(3):
                gx += smooth[d] * (padded[y + d, x + 2] - padded[y + d, x])
                gy += smooth[d] * (padded[y + 2, x + d] - padded[y, x + d])
            magnitudes.append(math.hypot(gx, gy))
    mean = sum(magnitudes) / len(magnitudes)
    return math.sqrt(sum((m - mean) ** 2 for m in magnitudes) / len(magnitudes))


def naive_colorfulness(pixels: np.ndarray) -> float:
    rg, yb = [], []
    for row in pixels:
        for r, g, b in row:
            rg.append(r - g)
            yb.append(0.5 * (r + g) - b)
    n = len(rg)
    mu_rg, mu_yb = sum(rg) / n, sum(yb) / n
    var_rg = sum((v - mu_rg) ** 2 for v in rg) / n
    var_yb = sum((v - mu_yb) ** 2 for v in yb) / n
    return math.sqrt(var_rg + var_yb) + 0.3 * math.sqrt(mu_rg ** 2 + mu_yb ** 2)


@pytest.fixture
def constant_shift():
    ref = np.zeros((16, 32, 3))
    return ErpImage(ref), ErpImage(ref + 0.1)


class TestPsnrFamily:
    @pytest.mark.parametrize("metric", [psnr, ws_psnr, cpp_psnr, lambda r, d: s_psnr(r, d, 1000)])
    def test_identical_inputs_are_infinite(self, metric, random_pair):
        ref, _ = random_pair
        result = metric(ref, ref)
        assert result.is_infinite
        assert result.to_dict()["value"] == "inf"

    @pytest.mark.parametrize("metric", [psnr, ws_psnr, cpp_psnr, lambda r, d: s_psnr(r, d, 100), lambda r, d: s_psnr(r, d, 5000)])
    def test_constant_difference_gives_twenty_db(self, metric, constant_shift):
        assert metric(*constant_shift).value == pytest.approx(20.0, abs=1e-9)

    def test_psnr_matches_direct_sum(self, random_pair):
        ref, dist = random_pair
        diffs = [(a - b) ** 2 for a, b in zip(ref.pixels.ravel(), dist.pixels.ravel())]
        expected = 10 * math.log10(1.0 / (sum(diffs) / len(diffs)))
        assert psnr(ref, dist).value == pytest.approx(expected, abs=1e-9)

    def test_ws_psnr_matches_naive_oracle(self, rng):
        for _ in range(5):
            ref = rng.uniform(size=(8, 16, 3))
            dist = np.clip(ref + rng.normal(scale=0.1, size=ref.shape), 0, 1)
            expected = 10 * math.log10(1.0 / naive_ws_mse(ref, dist))
            assert ws_psnr(ErpImage(ref), ErpImage(dist)).value == pytest.approx(expected, abs=1e-9)

    def test_polar_error_scores_higher_than_equatorial(self):
        ref = np.full((16, 32, 1), 0.5)
        polar, equator = ref.copy(), ref.copy()
        polar[0] += 0.2
        equator[8] += 0.2
        assert ws_psnr(ErpImage(ref), ErpImage(polar)).value > ws_psnr(ErpImage(ref), ErpImage(equator)).value

    def test_symmetric_and_monotone_in_noise(self, rng):
        ref = rng.uniform(0.2, 0.8, size=(32, 64, 3))
        pattern = rng.uniform(-1, 1, size=ref.shape)
        for metric in (psnr, ws_psnr, cpp_psnr, lambda r, d: s_psnr(r, d, 2000)):
            values = [metric(ErpImage(ref), ErpImage(ref + a * pattern)).value for a in (0.01, 0.05, 0.1)]
            assert values[0] > values[1] > values[2]
            a, b = ErpImage(ref), ErpImage(ref + 0.05 * pattern)
            assert metric(a, b).value == pytest.approx(metric(b, a).value, abs=1e-12)

    def test_ws_psnr_equals_psnr_for_constant_offset(self, rng):
        ref = rng.uniform(0.0, 0.7, size=(16, 32, 3))
        a, b = ErpImage(ref), ErpImage(ref + 0.25)
        assert ws_psnr(a, b).value == pytest.approx(psnr(a, b).value, abs=1e-9)

    def test_s_psnr_tracks_ws_psnr(self, rng):
        ref = rng.uniform(0.1, 0.9, size=(64, 128, 3))
        dist = ref + rng.uniform(-0.05, 0.05, size=ref.shape)
        a, b = ErpImage(ref), ErpImage(dist)
        assert abs(s_psnr(a, b, 10_000).value - ws_psnr(a, b).value) < 0.5

    def test_s_psnr_needs_one_hundred_points(self, random_pair):
        with pytest.raises(ArgumentError):
            s_psnr(*random_pair, 99)

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            psnr(ErpImage(np.zeros((8, 16, 3))), ErpImage(np.zeros((8, 16, 1))))

    def test_craster_mask_fraction_is_resolution_stable(self):
        small = craster_grid(64, 128)[2].mean()
        large = craster_grid(512, 1024)[2].mean()
        assert small == pytest.approx(large, rel=0.01)
        # equal-area map: sphere area 4π inside a 6π bounding box
        assert large == pytest.approx(2.0 / 3.0, rel=0.01)


class TestSsimFamily:
    def test_identity_is_exactly_one(self, random_pair):
        ref, _ = random_pair
        assert ssim(ref, ref)[0].value == 1.0
        assert ws_ssim(ref, ref).value == pytest.approx(1.0, abs=1e-15)

    def test_inverted_image_scores_low(self, rng):
        pixels = np.where(rng.uniform(size=(32, 64)) < 0.5, rng.uniform(0.0, 0.3, (32, 64)), rng.uniform(0.7, 1.0, (32, 64)))
        assert ssim(ErpImage(pixels), ErpImage(1.0 - pixels))[0].value < 0.5

    def test_map_is_bounded(self, rng):
        for _ in range(5):
            a, b = rng.uniform(size=(2, 24, 48, 3))
            smap = ssim_map(ErpImage(a), ErpImage(b))
            assert smap.shape == (14, 38)
            assert np.all((smap >= -1.0) & (smap <= 1.0))

    def test_too_small_image(self):
        img = ErpImage(np.zeros((10, 20, 3)))
        with pytest.raises(ArgumentError):
            ssim(img, img)

    def test_ws_ssim_matches_weighted_mean_oracle(self, rng):
        for _ in range(3):
            ref = rng.uniform(size=(24, 48, 3))
            dist = np.clip(ref + rng.normal(scale=0.1, size=ref.shape), 0, 1)
            smap = ssim_map(ErpImage(ref), ErpImage(dist))
            num = den = 0.0
            for j in range(smap.shape[0]):
                weight = math.cos((j + 5 + 0.5 - 24 / 2) * math.pi / 24)
                for i in range(smap.shape[1]):
                    num += weight * smap[j, i]
                    den += weight
            assert ws_ssim(ErpImage(ref), ErpImage(dist)).value == pytest.approx(num / den, abs=1e-9)

    def test_polar_distortion_scores_higher(self, rng):
        ref = rng.uniform(0.2, 0.8, size=(64, 128, 1))
        noise = rng.normal(scale=0.2, size=(11, 128, 1))
        polar, equator = ref.copy(), ref.copy()
        polar[:11] = np.clip(polar[:11] + noise, 0, 1)
        equator[27:38] = np.clip(equator[27:38] + noise, 0, 1)
        assert ws_ssim(ErpImage(ref), ErpImage(polar)).value > ws_ssim(ErpImage(ref), ErpImage(equator)).value


class TestContentDescriptors:
    def test_constant_image_has_zero_si(self):
        assert spatial_information(ErpImage(np.full((8, 16, 3), 0.4))) == 0.0

    def test_vertical_step_edge(self):
        pixels = np.zeros((8, 8))
        pixels[:, 4:] = 1.0
        assert spatial_information(ErpImage(pixels)) == pytest.approx(4 * math.sqrt(2) / 3, abs=1e-12)

    def test_si_ignores_constant_offset(self, rng):
        pixels = rng.uniform(0.0, 0.5, size=(16, 32))
        assert spatial_information(ErpImage(pixels)) == pytest.approx(spatial_information(ErpImage(pixels + 0.3)), abs=1e-12)

    def test_si_matches_naive_sobel(self, rng):
        for _ in range(5):
            gray = rng.uniform(size=(10, 20))
            assert spatial_information(ErpImage(gray)) == pytest.approx(naive_sobel_si(gray), abs=1e-9)

    def test_gray_rgb_has_zero_colorfulness(self, rng):
        gray = rng.uniform(size=(8, 16, 1))
        assert colorfulness(ErpImage(np.repeat(gray, 3, axis=2))) == 0.0

    def test_pure_red(self):
        pixels = np.zeros((8, 16, 3))
        pixels[..., 0] = 1.0
        assert colorfulness(ErpImage(pixels)) == pytest.approx(0.3 * math.sqrt(1.25), abs=1e-12)

    def test_colorfulness_matches_naive_oracle(self, rng):
        for _ in range(5):
            pixels = rng.uniform(size=(6, 12, 3))
            assert colorfulness(ErpImage(pixels)) == pytest.approx(naive_colorfulness(pixels), abs=1e-9)

    def test_grayscale_colorfulness_raises(self):
        with pytest.raises(ArgumentError):
            colorfulness(ErpImage(np.zeros((8, 16))))

    def test_descriptors_skip_cf_for_gray(self):
        assert set(content_descriptors(ErpImage(np.zeros((8, 16))))) == {"si"}


class TestWeights:
    def test_row_weights_are_symmetric(self):
        weights = erp_row_weights(10).weights
        np.testing.assert_allclose(weights, weights[::-1], atol=1e-15)
        assert weights.argmax() in (4, 5)

    def test_all_zero_weights_rejected(self):
        with pytest.raises(ArgumentError):
            LatitudeWeightMap(np.zeros(4))


class TestEvaluator:
    def test_runs_all_metrics(self, random_pair):
        evaluator = FullReferenceEvaluator(s_psnr_points=500)
        report = evaluator.evaluate(*random_pair)
        assert report["success"]
        assert [r["metric"] for r in report["results"]] == evaluator.metric_names
        assert "ws_psnr" in evaluator.get_summary(report)

    def test_subset_and_infinite_rendering(self, random_pair):
        ref, _ = random_pair
        report = FullReferenceEvaluator().evaluate(ref, ref, ["psnr", "ws_ssim"])
        assert report["results"][0] == {"metric": "psnr", "value": "inf"}
        assert report["results"][1]["metric"] == "ws_ssim"
        assert report["results"][1]["value"] == pytest.approx(1.0)

    def test_unknown_metric(self, random_pair):
        with pytest.raises(ArgumentError):
            FullReferenceEvaluator().evaluate(*random_pair, ["vmaf"])

    def test_failed_summary(self):
        assert generate_metric_summary({"success": False, "error": "boom"}).startswith("❌")

    def test_failing_metric_is_reported_not_raised(self, rng, caplog):
        ref = ErpImage(rng.uniform(size=(8, 16, 3)))
        dist = ErpImage(np.clip(ref.pixels + 0.05, 0.0, 1.0))
        report = FullReferenceEvaluator().evaluate(ref, dist, ["psnr", "ssim"])
        assert report["success"]
        assert report["failed"] == 1
        assert report["results"][0]["metric"] == "psnr"
        assert report["results"][1] == {"metric": "ssim", "error": report["results"][1]["error"],
                                        "note": "ArgumentError"}
        assert "ssim failed" in caplog.text
        assert "ssim: error" in generate_metric_summary(report)

    def test_all_metrics_failing_is_unsuccessful(self, rng):
        ref = ErpImage(rng.uniform(size=(8, 16, 3)))
        report = FullReferenceEvaluator().evaluate(ref, ref, ["ssim", "ws_ssim"])
        assert not report["success"]
        assert [r["metric"] for r in report["results"]] == ["ssim", "ws_ssim"]
        assert all("error" in r for r in report["results"])
