"""
Full-Reference Evaluator
Evaluador modular que ejecuta las métricas registradas sobre un par de imágenes
"""

import logging
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional

from src.modules.errors import ArgumentError, IQCaptionError
from src.modules.geometry import ErpImage
from .base_metric import BaseQualityMetric
from .psnr import PsnrMetric, WsPsnrMetric, SPsnrMetric, CppPsnrMetric
from .ssim import SsimMetric, WsSsimMetric
from .utils import generate_metric_summary

logger = logging.getLogger(__name__)


class FullReferenceEvaluator:
    """
    Evaluador de métricas full-reference usando métricas especializadas
    """

    def __init__(self, s_psnr_points: Optional[int] = None):
        """Inicializar evaluador con las métricas registradas"""
        self.metrics: List[BaseQualityMetric] = [
            PsnrMetric(),
            WsPsnrMetric(),
            SPsnrMetric(s_psnr_points),
            CppPsnrMetric(),
            SsimMetric(),
            WsSsimMetric(),
        ]
        self._log_capabilities()

    @property
    def metric_names(self) -> List[str]:
        return [m.name for m in self.metrics]

    def evaluate(self, ref: ErpImage, dist: ErpImage, names: Optional[Iterable[str]] = None) -> Dict[str, Any]:
        """
        Ejecutar un subconjunto de métricas sobre el par

        Args:
            ref: Imagen de referencia
            dist: Imagen distorsionada
            names: Métricas a ejecutar (todas si None)

        Returns:
            Dict con "success" y la lista de resultados {"metric", "value"};
            una métrica que falla aporta {"metric", "error", "note"}
        """
        selected = self._select(names)
        if not selected[0].can_process(ref, dist):
            raise ArgumentError(f"dimension mismatch: ref {ref.pixels.shape} vs dist {dist.pixels.shape}")

        start_time = datetime.now()
        results, failed = [], 0
        for metric in selected:
            try:
                result = metric.compute(ref, dist)
            except IQCaptionError as e:
                metric.log_error(str(e))
                results.append(metric.get_error_response(str(e), note=type(e).__name__))
                failed += 1
                continue
            metric.log_success(result)
            results.append(result.to_dict())

        processing_time = (datetime.now() - start_time).total_seconds()
        if failed == len(results):
            logger.error(f"❌ All {failed} metrics failed")
            return {"success": False, "error": "all metrics failed", "results": results}
        logger.info(f"✅ {len(results) - failed} metrics computed, {failed} failed ({processing_time:.2f}s)")
        return {"success": True, "results": results, "failed": failed}

    def _select(self, names: Optional[Iterable[str]]) -> List[BaseQualityMetric]:
        if names is None:
            return list(self.metrics)
        names = list(names)
        unknown = [n for n in names if n not in self.metric_names]
        if unknown or not names:
            raise ArgumentError(f"unknown metrics {unknown}; available: {self.metric_names}")
        by_name = {m.name: m for m in self.metrics}
        return [by_name[n] for n in names]

    def get_summary(self, report: Dict[str, Any]) -> str:
        return generate_metric_summary(report)

    def get_stats(self) -> Dict[str, Any]:
        return {
            "total_metrics": len(self.metrics),
            "metric_names": self.metric_names,
        }

    def _log_capabilities(self):
        logger.info(f"📋 Loaded metrics: {', '.join(self.metric_names)}")
