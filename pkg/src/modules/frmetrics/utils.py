"""
Metric Utilities
Utilidades comunes: comprobaciones, luma, pesos por latitud y resúmenes
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List

import numpy as np

from src.modules.errors import ArgumentError
from src.modules.geometry import ErpImage

# Rec.601
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class LatitudeWeightMap:
    """Pesos no negativos por fila (o por píxel), al menos uno positivo"""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if np.any(weights < 0) or not np.any(weights > 0):
            raise ArgumentError("latitude weights must be >= 0 with at least one > 0")
        object.__setattr__(self, 'weights', weights)


def erp_row_weights(height: int, row_offset: int = 0, total_height: int = None) -> LatitudeWeightMap:
    """
    Pesos WS-PSNR por fila: cos((j + 0.5 - H/2)·π/H)
    row_offset/total_height permiten pesar un mapa recortado (SSIM 'valid')
    """
    total = height if total_height is None else total_height
    rows = np.arange(height, dtype=np.float64) + row_offset
    weights = np.cos((rows + 0.5 - total / 2.0) * math.pi / total)
    return LatitudeWeightMap(np.clip(weights, 0.0, None))


def check_pair(ref: ErpImage, dist: ErpImage):
    """Misma geometría o error de argumento"""
    if not ref.same_geometry(dist):
        raise ArgumentError(
            f"dimension mismatch: ref {ref.pixels.shape} vs dist {dist.pixels.shape}"
        )


def stable_sum(values: np.ndarray) -> float:
    """Reducción final con suma compensada (independiente del orden)"""
    return math.fsum(np.asarray(values, dtype=np.float64).ravel())


def luma(img: ErpImage) -> np.ndarray:
    """Conversión a escala de grises (Rec.601); imágenes de 1 canal se devuelven tal cual"""
    if img.channels == 1:
        return img.pixels[:, :, 0]
    r, g, b = (img.pixels[:, :, i] for i in range(3))
    return LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b


def generate_metric_summary(report: Dict[str, Any]) -> str:
    """
    Resumen legible de una evaluación full-reference
    """
    if not report.get("success"):
        return f"❌ Evaluation failed: {report.get('error', 'unknown error')}"

    lines: List[str] = ["📊 FULL-REFERENCE METRICS"]
    for result in report.get("results", []):
        if "error" in result:
            lines.append(f"  • {result['metric']}: error ({result['error']})")
            continue
        value = result["value"]
        shown = value if isinstance(value, str) else f"{value:.4f}"
        lines.append(f"  • {result['metric']}: {shown}")
    return "\n".join(lines)
