"""
SSIM Family
SSIM clásico (ventana gaussiana 11x11, σ=1.5) y WS-SSIM ponderado por latitud
"""

from typing import Tuple

import numpy as np
from scipy import signal

from src.modules.errors import ArgumentError
from src.modules.geometry import ErpImage
from .base_metric import BaseQualityMetric, MetricResult
from .utils import check_pair, erp_row_weights, luma, stable_sum

WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
K1, K2 = 0.01, 0.03
PEAK = 1.0


def gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    """Equivalente a fspecial('gaussian') de MATLAB, normalizada a suma 1"""
    half = size // 2
    y, x = np.mgrid[-half:half + 1, -half:half + 1]
    g = np.exp(-(x ** 2 + y ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def ssim_map(ref: ErpImage, dist: ErpImage) -> np.ndarray:
    """
    Mapa SSIM por píxel sobre luma (modo 'valid': (h-10) x (w-10))
    """
    check_pair(ref, dist)
    if min(ref.height, ref.width) < WINDOW_SIZE:
        raise ArgumentError(f"ssim needs images of at least {WINDOW_SIZE}x{WINDOW_SIZE}")

    x, y = luma(ref), luma(dist)
    win = gaussian_window()
    c1, c2 = (K1 * PEAK) ** 2, (K2 * PEAK) ** 2

    def filt(a):
        return signal.convolve2d(a, win, mode='valid')

    mu_x, mu_y = filt(x), filt(y)
    mu_xx, mu_yy, mu_xy = mu_x * mu_x, mu_y * mu_y, mu_x * mu_y
    sigma_xx = filt(x * x) - mu_xx
    sigma_yy = filt(y * y) - mu_yy
    sigma_xy = filt(x * y) - mu_xy

    num = (2.0 * mu_xy + c1) * (2.0 * sigma_xy + c2)
    den = (mu_xx + mu_yy + c1) * (sigma_xx + sigma_yy + c2)
    return np.clip(num / den, -1.0, 1.0)


def ssim(ref: ErpImage, dist: ErpImage) -> Tuple[MetricResult, np.ndarray]:
    """
    SSIM medio y mapa por píxel

    Returns:
        (MetricResult, mapa SSIM)
    """
    smap = ssim_map(ref, dist)
    return MetricResult("ssim", stable_sum(smap) / smap.size), smap


def ws_ssim(ref: ErpImage, dist: ErpImage) -> MetricResult:
    """Media del mapa SSIM ponderada por el coseno de la latitud"""
    smap = ssim_map(ref, dist)
    offset = WINDOW_SIZE // 2
    weights = erp_row_weights(smap.shape[0], row_offset=offset, total_height=ref.height).weights
    weights = np.broadcast_to(weights[:, None], smap.shape)
    return MetricResult("ws_ssim", stable_sum(weights * smap) / stable_sum(weights))


class SsimMetric(BaseQualityMetric):
    def __init__(self):
        super().__init__("ssim")

    def compute(self, ref, dist):
        result, _ = ssim(ref, dist)
        return result


class WsSsimMetric(BaseQualityMetric):
    def __init__(self):
        super().__init__("ws_ssim")

    def compute(self, ref, dist):
        return ws_ssim(ref, dist)
