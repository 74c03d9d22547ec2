"""
Content Descriptors
Descriptores de contenido: Spatial Information (SI) y Colorfulness (CF)
"""

import math

import numpy as np
from scipy import ndimage

from src.modules.errors import ArgumentError
from src.modules.geometry import ErpImage
from .utils import luma


def spatial_information(img: ErpImage) -> float:
    """
    SI: desviación típica de la magnitud del gradiente Sobel sobre luma
    Se descarta el borde de un píxel (respuesta de padding)
    """
    gray = luma(img)
    gx = ndimage.sobel(gray, axis=1, mode='nearest')
    gy = ndimage.sobel(gray, axis=0, mode='nearest')
    magnitude = np.hypot(gx, gy)
    if min(magnitude.shape) > 2:
        magnitude = magnitude[1:-1, 1:-1]
    return float(np.std(magnitude))


def colorfulness(img: ErpImage) -> float:
    """
    CF (Hasler–Süsstrunk): √(σ_rg² + σ_yb²) + 0.3·√(μ_rg² + μ_yb²)
    """
    if img.channels != 3:
        raise ArgumentError("colorfulness needs a 3-channel image")

    r, g, b = (img.pixels[:, :, i] for i in range(3))
    rg = r - g
    yb = 0.5 * (r + g) - b
    std_part = math.sqrt(float(np.var(rg)) + float(np.var(yb)))
    mean_part = math.sqrt(float(np.mean(rg)) ** 2 + float(np.mean(yb)) ** 2)
    return std_part + 0.3 * mean_part


def content_descriptors(img: ErpImage) -> dict:
    """SI y CF (CF sólo para imágenes en color)"""
    descriptors = {"si": spatial_information(img)}
    if img.channels == 3:
        descriptors["cf"] = colorfulness(img)
    return descriptors
