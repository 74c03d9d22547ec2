"""
Recommendation Table
Tabla 3x4 (nivel de calidad x situación) -> recomendación, cargable desde JSON
"""

import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Tuple, Union

from src.modules.errors import ConfigError
from .vocabulary import DistortionSituation, QualityLevel, Recommendation

logger = logging.getLogger(__name__)

Cell = Tuple[QualityLevel, DistortionSituation]


def severity_recommendation(level: QualityLevel, situation: DistortionSituation) -> Recommendation:
    """Regla por defecto: severidad = índice de nivel + índice de situación (0..5)"""
    severity = level.index + situation.index
    if severity == 0:
        return Recommendation.ShouldSave
    if severity <= 2:
        return Recommendation.RecommendSave
    if severity <= 4:
        return Recommendation.RecommendDiscard
    return Recommendation.ShouldDiscard


class RecommendationTable:
    """
    Tabla de recomendaciones con las 12 celdas pobladas y monótona en ambos ejes
    """

    def __init__(self, cells: Mapping[Cell, Recommendation]):
        self.cells: Dict[Cell, Recommendation] = dict(cells)
        self._validate()

    @classmethod
    def default(cls) -> "RecommendationTable":
        return cls({(level, situation): severity_recommendation(level, situation)
                    for level in QualityLevel for situation in DistortionSituation})

    @classmethod
    def from_dict(cls, data: Mapping[str, str]) -> "RecommendationTable":
        """
        Construir desde {"Good,CnoDist": "ShouldSave", ...}

        Raises:
            ConfigError: claves o nombres desconocidos, celdas ausentes o tabla no monótona
        """
        cells = {}
        for key, name in data.items():
            try:
                level_key, situation_key = key.split(",")
                cell = (QualityLevel.from_key(level_key), DistortionSituation[situation_key.strip()])
                cells[cell] = Recommendation[str(name).strip()]
            except (KeyError, ValueError) as e:
                raise ConfigError(f"invalid recommendation table entry {key!r}: {name!r}") from e
        return cls(cells)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "RecommendationTable":
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read recommendation table {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"recommendation table {path} must be a JSON object")
        table = cls.from_dict(data)
        logger.info(f"✅ Recommendation table loaded: {path}")
        return table

    def _validate(self):
        missing = [f"{l.key},{s.name}" for l in QualityLevel for s in DistortionSituation if (l, s) not in self.cells]
        if missing:
            raise ConfigError(f"recommendation table is missing cells: {', '.join(missing)}")

        levels = sorted(QualityLevel, key=lambda l: l.index)
        situations = list(DistortionSituation)
        for situation in situations:
            for better, worse in zip(levels, levels[1:]):
                if self.cells[(worse, situation)].value < self.cells[(better, situation)].value:
                    raise ConfigError(f"recommendation table not monotone: {worse.key} beats {better.key} under {situation.name}")
        for level in levels:
            for milder, harsher in zip(situations, situations[1:]):
                if self.cells[(level, harsher)].value < self.cells[(level, milder)].value:
                    raise ConfigError(f"recommendation table not monotone: {harsher.name} beats {milder.name} at {level.key}")

    def lookup(self, level: QualityLevel, situation: DistortionSituation) -> Recommendation:
        return self.cells[(level, situation)]

    def to_dict(self) -> Dict[str, str]:
        return {f"{level.key},{situation.name}": rec.name for (level, situation), rec in self.cells.items()}
