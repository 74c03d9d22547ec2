"""
Caption Package
Vocabulario, tabla de recomendaciones y generador de captions de calidad
"""

from .vocabulary import QualityLevel, DistortionSituation, Recommendation
from .table import RecommendationTable, severity_recommendation
from .generator import (
    CaptionGenerator,
    CaptionRecord,
    TEMPLATE,
    score_to_level,
    recommend,
    render_caption,
    parse_caption,
)

__all__ = [
    'QualityLevel',
    'DistortionSituation',
    'Recommendation',
    'RecommendationTable',
    'severity_recommendation',
    'CaptionGenerator',
    'CaptionRecord',
    'TEMPLATE',
    'score_to_level',
    'recommend',
    'render_caption',
    'parse_caption',
]
