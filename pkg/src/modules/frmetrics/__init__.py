"""
Full-Reference Metrics Package
Métricas full-reference esféricas y descriptores de contenido
"""

from .base_metric import BaseQualityMetric, MetricResult
from .psnr import psnr, ws_psnr, s_psnr, cpp_psnr, craster_grid
from .ssim import ssim, ssim_map, ws_ssim
from .content import spatial_information, colorfulness, content_descriptors
from .evaluator import FullReferenceEvaluator
from .utils import LatitudeWeightMap, erp_row_weights, luma

__all__ = [
    'BaseQualityMetric',
    'MetricResult',
    'psnr',
    'ws_psnr',
    's_psnr',
    'cpp_psnr',
    'craster_grid',
    'ssim',
    'ssim_map',
    'ws_ssim',
    'spatial_information',
    'colorfulness',
    'content_descriptors',
    'FullReferenceEvaluator',
    'LatitudeWeightMap',
    'erp_row_weights',
    'luma',
]
