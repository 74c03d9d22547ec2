"""
Caption Vocabulary
Conjuntos cerrados de la plantilla: nivel de calidad, situación de distorsión y recomendación
"""

from enum import Enum


class QualityLevel(Enum):
    """Nivel de calidad con sus anclas numéricas 3/2/1"""

    GOOD = 3
    FAIR = 2
    POOR = 1

    @property
    def label(self) -> str:
        return self.name.lower()

    @property
    def index(self) -> int:
        """Good=0, Fair=1, Poor=2"""
        return 3 - self.value

    @property
    def key(self) -> str:
        return self.name.capitalize()

    @classmethod
    def from_key(cls, key: str) -> "QualityLevel":
        return cls[key.strip().upper()]

    @classmethod
    def from_label(cls, label: str) -> "QualityLevel":
        return cls[label.upper()]


class DistortionSituation(Enum):
    """Situación de distorsión; el valor es el índice de clase de la DSPN"""

    CnoDist = 0
    CdistR1 = 1
    CdistR2 = 2
    CdistGl = 3

    @property
    def phrase(self) -> str:
        return SITUATION_PHRASES[self]

    @property
    def index(self) -> int:
        return self.value


SITUATION_PHRASES = {
    DistortionSituation.CnoDist: "no perceptibly distorted region",
    DistortionSituation.CdistR1: "one distorted region",
    DistortionSituation.CdistR2: "two distorted regions",
    DistortionSituation.CdistGl: "global distortion",
}


class Recommendation(Enum):
    """Recomendación; el valor crece cuanto menos favorable es"""

    ShouldSave = 0
    RecommendSave = 1
    RecommendDiscard = 2
    ShouldDiscard = 3

    @property
    def phrase(self) -> str:
        return RECOMMENDATION_PHRASES[self]


RECOMMENDATION_PHRASES = {
    Recommendation.ShouldSave: "should be saved",
    Recommendation.RecommendSave: "is recommended to be saved",
    Recommendation.RecommendDiscard: "is recommended to be discarded",
    Recommendation.ShouldDiscard: "should be discarded",
}
