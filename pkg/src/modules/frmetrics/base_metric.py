"""
Base Quality Metric
Clase abstracta para métricas full-reference
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

from src.modules.geometry import ErpImage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricResult:
    """
    Resultado de una métrica (dB para la familia PSNR, sin unidad para SSIM)
    Entradas idénticas en PSNR se marcan con is_infinite, nunca con un centinela
    """

    name: str
    value: float
    is_infinite: bool = False

    def json_value(self) -> Union[float, str]:
        return "inf" if self.is_infinite else float(self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {"metric": self.name, "value": self.json_value()}


class BaseQualityMetric(ABC):
    """
    Clase base abstracta para métricas de calidad full-reference
    Define la interfaz común (compute) y el formato de logs / errores
    """

    def __init__(self, name: str):
        self.name = name
        self.logger = logging.getLogger(f"{__name__}.{name}")

    def can_process(self, ref: ErpImage, dist: ErpImage) -> bool:
        """Verificar que el par tiene la misma geometría"""
        return ref.same_geometry(dist)

    @abstractmethod
    def compute(self, ref: ErpImage, dist: ErpImage) -> MetricResult:
        """
        Calcular la métrica sobre un par (referencia, distorsionada)

        Args:
            ref: Imagen de referencia
            dist: Imagen distorsionada

        Returns:
            MetricResult
        """
        pass

    def get_error_response(self, error: str, note: Optional[str] = None) -> Dict[str, Any]:
        response = {
            "metric": self.name,
            "error": error
        }
        if note:
            response["note"] = note
        return response

    def log_success(self, result: MetricResult):
        value = "inf" if result.is_infinite else f"{result.value:.4f}"
        self.logger.info(f"✅ {self.name}: {value}")

    def log_error(self, error: str):
        self.logger.error(f"❌ {self.name} failed: {error}")


def psnr_from_mse(name: str, mse: float, peak: float = 1.0) -> MetricResult:
    """10·log10(MAX²/MSE); MSE cero -> is_infinite"""
    if mse <= 0.0:
        return MetricResult(name, math.inf, is_infinite=True)
    return MetricResult(name, 10.0 * math.log10(peak * peak / mse))
