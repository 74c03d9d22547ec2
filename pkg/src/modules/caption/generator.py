"""
Caption Generator
Mapeo valor-texto, consulta de recomendación y relleno de la plantilla de caption
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from src.config.settings import settings
from src.modules.errors import ArgumentError
from .table import RecommendationTable
from .vocabulary import (
    RECOMMENDATION_PHRASES,
    SITUATION_PHRASES,
    DistortionSituation,
    QualityLevel,
    Recommendation,
)

logger = logging.getLogger(__name__)

TEMPLATE = "A {level}-quality omnidirectional image with {situation}. It {recommendation}."

_CAPTION_RE = re.compile(
    r"^A (?P<level>good|fair|poor)-quality omnidirectional image with (?P<situation>.+)\. It (?P<rec>.+)\.$"
)

SCORE_RANGE = (1.0, 3.0)


def score_to_level(score: float, good: Optional[float] = None, fair: Optional[float] = None) -> QualityLevel:
    """
    Mapear la puntuación ŝ a un nivel de calidad

    Args:
        score: Puntuación predicha (se espera en [1, 3])
        good: Umbral de Good (por defecto settings.CAPTION_GOOD)
        fair: Umbral de Fair (por defecto settings.CAPTION_FAIR)
    """
    good = settings.CAPTION_GOOD if good is None else good
    fair = settings.CAPTION_FAIR if fair is None else fair
    if score is None or math.isnan(score):
        raise ArgumentError("quality score is NaN")
    if not fair < good:
        raise ArgumentError(f"caption thresholds must satisfy fair < good, got {fair} / {good}")

    low, high = SCORE_RANGE
    if score < low or score > high:
        clamped = min(max(score, low), high)
        logger.warning(f"⚠️ quality score {score} outside [{low}, {high}], clamped to {clamped}")
        score = clamped

    if score >= good:
        return QualityLevel.GOOD
    if score >= fair:
        return QualityLevel.FAIR
    return QualityLevel.POOR


def recommend(level: QualityLevel, situation: DistortionSituation,
              table: Optional[RecommendationTable] = None) -> Recommendation:
    table = table or RecommendationTable.default()
    return table.lookup(level, situation)


@dataclass
class CaptionRecord:
    """Texto del caption más los valores crudos que lo generaron"""

    text: str
    level: QualityLevel
    situation: DistortionSituation
    recommendation: Recommendation
    score: Optional[float] = None
    probs: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "caption": self.text,
            "score": self.score,
            "probs": self.probs,
            "level": self.level.key,
            "situation": self.situation.name,
            "recommendation": self.recommendation.name,
        }


def render_caption(level: QualityLevel, situation: DistortionSituation, rec: Recommendation,
                   score: Optional[float] = None, probs: Optional[Sequence[float]] = None) -> CaptionRecord:
    text = TEMPLATE.format(level=level.label, situation=situation.phrase, recommendation=rec.phrase)
    return CaptionRecord(text, level, situation, rec, score, [float(p) for p in (probs if probs is not None else [])])


def parse_caption(text: str):
    """
    Inversa de la plantilla

    Returns:
        (QualityLevel, DistortionSituation, Recommendation)
    """
    match = _CAPTION_RE.match(text.strip())
    if not match:
        raise ArgumentError(f"text does not follow the caption template: {text!r}")
    situations = {phrase: s for s, phrase in SITUATION_PHRASES.items()}
    recommendations = {phrase: r for r, phrase in RECOMMENDATION_PHRASES.items()}
    if match["situation"] not in situations or match["rec"] not in recommendations:
        raise ArgumentError(f"unknown phrase in caption: {text!r}")
    return QualityLevel.from_label(match["level"]), situations[match["situation"]], recommendations[match["rec"]]


class CaptionGenerator:
    """
    Generador de captions: (ŝ, p̂) -> texto + registro estructurado
    """

    def __init__(self, table: Optional[RecommendationTable] = None,
                 good: Optional[float] = None, fair: Optional[float] = None):
        if table is None:
            table = RecommendationTable.from_json(settings.CAPTION_TABLE) if settings.CAPTION_TABLE else RecommendationTable.default()
        self.table = table
        self.good = settings.CAPTION_GOOD if good is None else good
        self.fair = settings.CAPTION_FAIR if fair is None else fair
        self.generated = 0

    def generate(self, score: float, probs: Sequence[float]) -> CaptionRecord:
        """
        Args:
            score: Puntuación ŝ
            probs: Probabilidades p̂ sobre las 4 situaciones (argmax = situación)
        """
        if len(probs) != len(DistortionSituation):
            raise ArgumentError(f"expected {len(DistortionSituation)} situation probabilities, got {len(probs)}")
        situation = DistortionSituation(max(range(len(probs)), key=lambda i: probs[i]))
        level = score_to_level(score, self.good, self.fair)
        record = render_caption(level, situation, recommend(level, situation, self.table), float(score), probs)
        self.generated += 1
        logger.debug(f"caption: {record.text}")
        return record

    def from_output(self, output) -> CaptionRecord:
        """Caption directamente desde un ModelOutput"""
        return self.generate(output.score, list(output.probs))

    def get_stats(self) -> Dict[str, Any]:
        return {
            "generated": self.generated,
            "thresholds": {"good": self.good, "fair": self.fair},
            "table": self.table.to_dict(),
        }
