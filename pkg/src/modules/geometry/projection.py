"""
Gnomonic Projection
Proyección ERP <-> esfera <-> plano tangente y muestreo de viewports
"""

import math
from typing import Tuple

import numpy as np

from src.modules.errors import ArgumentError
from .coords import SphericalCoord, ViewportSpec, TWO_PI, HALF_PI
from .erp import ErpImage

INTERPOLATIONS = ('bilinear', 'nearest')


def _check_index(name: str, value: int, limit: int):
    if int(value) != value or not (0 <= value < limit):
        raise ArgumentError(f"{name}={value} outside [0, {limit})")


def erp_to_sphere(u: int, v: int, w: int, h: int) -> SphericalCoord:
    """
    Centro del píxel (u, v) de un raster ERP w x h a coordenadas esféricas
    """
    if w < 1 or h < 1:
        raise ArgumentError(f"invalid raster size {w}x{h}")
    _check_index('u', u, w)
    _check_index('v', v, h)

    lon = TWO_PI * (u + 0.5) / w - math.pi
    lat = HALF_PI - math.pi * (v + 0.5) / h
    return SphericalCoord(lat, lon)


def _tangent_coords(spec: ViewportSpec, x, y):
    # y crece hacia abajo en el raster; v positivo es norte
    tan_x, tan_y = spec.half_extent
    u = tan_x * (2.0 * (x + 0.5) / spec.out_w - 1.0)
    v = tan_y * (1.0 - 2.0 * (y + 0.5) / spec.out_h)
    return u, v


def gnomonic_backproject(spec: ViewportSpec, x: int, y: int) -> SphericalCoord:
    """
    Proyección gnomónica inversa de un píxel del viewport

    Args:
        spec: Viewport (centro, fov, tamaño)
        x, y: Píxel del raster del viewport

    Returns:
        SphericalCoord del rayo que pasa por el centro del píxel
    """
    _check_index('x', x, spec.out_w)
    _check_index('y', y, spec.out_h)

    u, v = _tangent_coords(spec, x, y)
    rho = math.hypot(u, v)
    if rho == 0.0:
        return spec.center

    lat0, lon0 = spec.center.lat, spec.center.lon
    c = math.atan(rho)
    sin_c, cos_c = math.sin(c), math.cos(c)

    arg = cos_c * math.sin(lat0) + v * sin_c * math.cos(lat0) / rho
    lat = math.asin(min(1.0, max(-1.0, arg)))
    lon = lon0 + math.atan2(u * sin_c, rho * math.cos(lat0) * cos_c - v * math.sin(lat0) * sin_c)
    return SphericalCoord(lat, lon)


def gnomonic_project(coord: SphericalCoord, spec: ViewportSpec) -> Tuple[float, float]:
    """
    Proyección gnomónica directa: esfera -> píxel continuo (x, y) del viewport
    """
    lat0, lon0 = spec.center.lat, spec.center.lon
    dlon = coord.lon - lon0
    cos_c = math.sin(lat0) * math.sin(coord.lat) + math.cos(lat0) * math.cos(coord.lat) * math.cos(dlon)
    if cos_c <= 0.0:
        raise ArgumentError("point lies on the far hemisphere of the viewport center")

    u = math.cos(coord.lat) * math.sin(dlon) / cos_c
    v = (math.cos(lat0) * math.sin(coord.lat) - math.sin(lat0) * math.cos(coord.lat) * math.cos(dlon)) / cos_c

    tan_x, tan_y = spec.half_extent
    x = (u / tan_x + 1.0) * spec.out_w / 2.0 - 0.5
    y = (1.0 - v / tan_y) * spec.out_h / 2.0 - 0.5
    return x, y


def backproject_grid(spec: ViewportSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Versión vectorizada de gnomonic_backproject sobre todo el raster

    Returns:
        (lat, lon) arrays de forma (out_h, out_w); lon envuelta a [-π, π)
    """
    xs = np.arange(spec.out_w, dtype=np.float64)
    ys = np.arange(spec.out_h, dtype=np.float64)
    u, v = _tangent_coords(spec, xs[None, :], ys[:, None])
    u, v = np.broadcast_arrays(u, v)

    lat0, lon0 = spec.center.lat, spec.center.lon
    rho = np.hypot(u, v)
    at_center = rho == 0.0
    safe_rho = np.where(at_center, 1.0, rho)

    c = np.arctan(rho)
    sin_c, cos_c = np.sin(c), np.cos(c)
    arg = cos_c * math.sin(lat0) + v * sin_c * math.cos(lat0) / safe_rho
    lat = np.arcsin(np.clip(arg, -1.0, 1.0))
    lon = lon0 + np.arctan2(u * sin_c, rho * math.cos(lat0) * cos_c - v * math.sin(lat0) * sin_c)

    lat = np.where(at_center, lat0, lat)
    lon = np.where(at_center, lon0, lon)
    lon = np.mod(lon + math.pi, TWO_PI) - math.pi
    return lat, lon


def sample_sphere(pixels: np.ndarray, lat: np.ndarray, lon: np.ndarray, interpolation: str = 'bilinear') -> np.ndarray:
    """
    Muestrear un raster ERP (h, w, c) en coordenadas esféricas arbitrarias
    Longitud envuelta en el seam, latitud recortada en los polos

    Returns:
        Array de forma lat.shape + (c,)
    """
    if interpolation not in INTERPOLATIONS:
        raise ArgumentError(f"unknown interpolation '{interpolation}', expected one of {INTERPOLATIONS}")

    h, w = pixels.shape[:2]
    fx = (np.asarray(lon) + math.pi) / TWO_PI * w - 0.5
    fy = (HALF_PI - np.asarray(lat)) / math.pi * h - 0.5

    if interpolation == 'nearest':
        xi = np.mod(np.floor(fx + 0.5).astype(np.int64), w)
        yi = np.clip(np.floor(fy + 0.5).astype(np.int64), 0, h - 1)
        return pixels[yi, xi]

    fy = np.clip(fy, 0.0, h - 1.0)
    x0 = np.floor(fx)
    y0 = np.floor(fy)
    tx = (fx - x0)[..., None]
    ty = (fy - y0)[..., None]

    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    x1 = np.mod(x0 + 1, w)
    x0 = np.mod(x0, w)
    y1 = np.minimum(y0 + 1, h - 1)

    # forma a + t·(b − a): un raster constante se reproduce exactamente
    top = pixels[y0, x0] + tx * (pixels[y0, x1] - pixels[y0, x0])
    bottom = pixels[y1, x0] + tx * (pixels[y1, x1] - pixels[y1, x0])
    return top + ty * (bottom - top)


def extract_viewport(img: ErpImage, spec: ViewportSpec, interpolation: str = 'bilinear') -> ErpImage:
    """
    Extraer un viewport rectilíneo de una imagen ERP

    Args:
        img: Imagen equirectangular
        spec: Centro, fov y tamaño del viewport
        interpolation: 'bilinear' (por defecto) o 'nearest'

    Returns:
        ErpImage de tamaño out_h x out_w (kind='viewport')
    """
    lat, lon = backproject_grid(spec)
    samples = sample_sphere(img.pixels, lat, lon, interpolation)
    return ErpImage(np.clip(samples, 0.0, 1.0), kind="viewport")


def cut_viewports(img: ErpImage, plan, dtype=np.float32) -> np.ndarray:
    """
    Cortar todos los viewports de un plan en su orden

    Returns:
        Array (M, out_h, out_w, 3); imágenes de un canal se replican a RGB
    """
    views = np.stack([extract_viewport(img, spec).pixels for spec in plan])
    if views.shape[-1] == 1:
        views = np.repeat(views, 3, axis=-1)
    return views.astype(dtype)
