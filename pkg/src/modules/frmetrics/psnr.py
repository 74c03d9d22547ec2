"""
PSNR Family
PSNR plano y variantes esféricas: WS-PSNR, S-PSNR y CPP-PSNR
"""

import math
from typing import Tuple

import numpy as np

from src.config.settings import settings
from src.modules.errors import ArgumentError
from src.modules.geometry import ErpImage, fibonacci_lattice, sample_sphere
from .base_metric import BaseQualityMetric, MetricResult, psnr_from_mse
from .utils import check_pair, erp_row_weights, stable_sum

SQRT_3PI = math.sqrt(3.0 * math.pi)


def psnr(ref: ErpImage, dist: ErpImage) -> MetricResult:
    """PSNR con MAX=1; el MSE se promedia sobre canales"""
    check_pair(ref, dist)
    err = (ref.pixels - dist.pixels) ** 2
    return psnr_from_mse("psnr", stable_sum(err) / err.size)


def ws_psnr(ref: ErpImage, dist: ErpImage) -> MetricResult:
    """
    WS-PSNR: MSE ponderado por el coseno de la latitud de cada fila
    """
    check_pair(ref, dist)
    weights = erp_row_weights(ref.height).weights[:, None, None]
    weights = np.broadcast_to(weights, ref.pixels.shape)
    err = (ref.pixels - dist.pixels) ** 2
    return psnr_from_mse("ws_psnr", stable_sum(weights * err) / stable_sum(weights))


def s_psnr(ref: ErpImage, dist: ErpImage, n_points: int = None, interpolation: str = 'nearest') -> MetricResult:
    """
    S-PSNR: MSE sobre n_points muestras casi uniformes de la esfera (Fibonacci)

    Args:
        ref, dist: Par de imágenes ERP
        n_points: Número de puntos (>= 100); por defecto settings.S_PSNR_POINTS
        interpolation: 'nearest' (por defecto) o 'bilinear'
    """
    check_pair(ref, dist)
    n_points = settings.S_PSNR_POINTS if n_points is None else n_points
    if n_points < 100:
        raise ArgumentError(f"s_psnr needs n_points >= 100, got {n_points}")

    lat, lon = fibonacci_lattice(n_points)
    err = (sample_sphere(ref.pixels, lat, lon, interpolation)
           - sample_sphere(dist.pixels, lat, lon, interpolation)) ** 2
    return psnr_from_mse("s_psnr", stable_sum(err) / err.size)


def craster_grid(height: int, width: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Raster Craster parabólico (CPP) de tamaño height x width

    Returns:
        (lat, lon, valid) para cada píxel; lat/lon sólo tienen sentido donde valid
    """
    xs = ((np.arange(width) + 0.5) / width * 2.0 - 1.0) * SQRT_3PI
    ys = (0.5 - (np.arange(height) + 0.5) / height) * SQRT_3PI
    x, y = np.meshgrid(xs, ys)

    lat = 3.0 * np.arcsin(np.clip(y / SQRT_3PI, -1.0, 1.0))
    denom = math.sqrt(3.0 / math.pi) * (2.0 * np.cos(2.0 * lat / 3.0) - 1.0)
    lon = x / np.where(denom > 0, denom, 1.0)
    valid = (denom > 0) & (np.abs(lon) <= math.pi)
    return lat, np.where(valid, lon, 0.0), valid


def cpp_psnr(ref: ErpImage, dist: ErpImage) -> MetricResult:
    """
    CPP-PSNR: ambas imágenes se reproyectan a Craster parabólico y el PSNR
    se calcula sólo sobre la máscara válida
    """
    check_pair(ref, dist)
    lat, lon, valid = craster_grid(ref.height, ref.width)
    lat, lon = lat[valid], lon[valid]

    err = (sample_sphere(ref.pixels, lat, lon) - sample_sphere(dist.pixels, lat, lon)) ** 2
    return psnr_from_mse("cpp_psnr", stable_sum(err) / err.size)


class PsnrMetric(BaseQualityMetric):
    def __init__(self):
        super().__init__("psnr")

    def compute(self, ref, dist):
        return psnr(ref, dist)


class WsPsnrMetric(BaseQualityMetric):
    def __init__(self):
        super().__init__("ws_psnr")

    def compute(self, ref, dist):
        return ws_psnr(ref, dist)


class SPsnrMetric(BaseQualityMetric):
    """S-PSNR con número de puntos configurable"""

    def __init__(self, n_points: int = None):
        super().__init__("s_psnr")
        self.n_points = n_points

    def compute(self, ref, dist):
        return s_psnr(ref, dist, self.n_points)


class CppPsnrMetric(BaseQualityMetric):
    def __init__(self):
        super().__init__("cpp_psnr")

    def compute(self, ref, dist):
        return cpp_psnr(ref, dist)
