"""
Subjective Ratings
Tabla de puntuaciones sujeto x imagen, MOS y screening de sujetos (ITU-R BT.500)
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.modules.errors import ArgumentError, ConfigError, DegenerateInputError

logger = logging.getLogger(__name__)

RATING_COLUMNS = ['subject_id', 'image_id', 'score']
MOS_COLUMNS = ['image_id', 'mos', 'variance', 'n']
VALID_SCORES = {1, 2, 3}


class RatingTable:
    """
    Tabla de puntuaciones (subject_id, image_id, score) con score en {1, 2, 3}
    Como mucho una entrada por par (sujeto, imagen)
    """

    def __init__(self, entries: Iterable[Tuple[str, str, int]], catalog: Optional[Sequence[str]] = None):
        frame = pd.DataFrame(list(entries), columns=RATING_COLUMNS)
        self.frame = self._validate(frame)
        # catálogo opcional: imágenes esperadas aunque no tengan puntuaciones
        self.catalog = list(catalog) if catalog is not None else None

    @staticmethod
    def _validate(frame: pd.DataFrame) -> pd.DataFrame:
        frame = frame.copy()
        frame['subject_id'] = frame['subject_id'].astype(str)
        frame['image_id'] = frame['image_id'].astype(str)

        scores = pd.to_numeric(frame['score'], errors='coerce')
        bad = ~scores.isin(VALID_SCORES)
        if bad.any():
            raise ArgumentError(f"scores must be in {{1,2,3}}; offending rows: {frame[bad].head(3).to_dict('records')}")
        frame['score'] = scores.astype(int)

        dup = frame.duplicated(subset=['subject_id', 'image_id'])
        if dup.any():
            raise ArgumentError(f"duplicate (subject, image) entries: {frame[dup].head(3).to_dict('records')}")
        return frame.reset_index(drop=True)

    @classmethod
    def from_csv(cls, path: Union[str, Path], catalog: Optional[Sequence[str]] = None) -> "RatingTable":
        """Leer CSV con cabecera subject_id,image_id,score"""
        frame = pd.read_csv(path, dtype={'subject_id': str, 'image_id': str})
        missing = [c for c in RATING_COLUMNS if c not in frame.columns]
        if missing:
            raise ConfigError(f"ratings CSV {path} misses columns {missing}")
        return cls(frame[RATING_COLUMNS].itertuples(index=False, name=None), catalog)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def subjects(self) -> List[str]:
        return list(dict.fromkeys(self.frame['subject_id']))

    @property
    def images(self) -> List[str]:
        return list(dict.fromkeys(self.frame['image_id']))

    def matrix(self) -> pd.DataFrame:
        """Matriz imagen x sujeto (NaN donde no hay puntuación)"""
        return self.frame.pivot(index='image_id', columns='subject_id', values='score').astype(float)


@dataclass(frozen=True)
class MosRecord:
    image_id: str
    mos: float
    variance: float
    n_ratings: int

    def to_row(self) -> Dict[str, object]:
        return {"image_id": self.image_id, "mos": self.mos, "variance": self.variance, "n": self.n_ratings}


def compute_mos(table: RatingTable) -> List[MosRecord]:
    """
    MOS y varianza muestral por imagen

    Args:
        table: Tabla de puntuaciones no vacía

    Returns:
        Lista de MosRecord en orden de primera aparición
    """
    if len(table) == 0:
        raise DegenerateInputError("rating table is empty")

    records = []
    for image_id, group in table.frame.groupby('image_id', sort=False):
        scores = group['score'].to_numpy(dtype=np.float64)
        variance = float(np.var(scores, ddof=1)) if scores.size > 1 else 0.0
        records.append(MosRecord(str(image_id), float(np.mean(scores)), variance, int(scores.size)))

    if table.catalog is not None:
        rated = {r.image_id for r in records}
        unrated = [img for img in table.catalog if img not in rated]
        if unrated:
            logger.warning(f"⚠️ {len(unrated)} images without ratings excluded from MOS: {unrated[:5]}")

    logger.info(f"📊 MOS computed for {len(records)} images")
    return records


def write_mos_csv(records: Sequence[MosRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    frame = pd.DataFrame([r.to_row() for r in records], columns=MOS_COLUMNS)
    tmp = path.with_name(path.name + '.tmp')
    frame.to_csv(tmp, index=False)
    tmp.replace(path)
    return path


@dataclass
class SubjectScreening:
    """Contadores BT.500 de un sujeto"""

    subject_id: str
    p: int = 0
    q: int = 0
    n_rated: int = 0
    mean_deviation: float = 0.0
    rejected: bool = False
    reason: Optional[str] = None

    def to_dict(self):
        return {
            "subject_id": self.subject_id,
            "P": self.p,
            "Q": self.q,
            "n_rated": self.n_rated,
            "mean_deviation": self.mean_deviation,
            "rejected": self.rejected,
            "reason": self.reason,
        }


@dataclass
class ScreeningReport:
    kept: List[str] = field(default_factory=list)
    rejected: List[str] = field(default_factory=list)
    subjects: Dict[str, SubjectScreening] = field(default_factory=dict)

    def to_dict(self):
        return {
            "kept": self.kept,
            "rejected": self.rejected,
            "subjects": [self.subjects[s].to_dict() for s in sorted(self.subjects)],
        }


def _outlier_bound(scores: np.ndarray) -> float:
    """2σ si la distribución es normal (2 ≤ β2 ≤ 4), √20·σ en otro caso"""
    sigma = float(np.std(scores, ddof=1))
    centered = scores - scores.mean()
    m2 = float(np.mean(centered ** 2))
    m4 = float(np.mean(centered ** 4))
    kurtosis = m4 / (m2 * m2)
    return (2.0 if 2.0 <= kurtosis <= 4.0 else math.sqrt(20.0)) * sigma


def screen_subjects(table: RatingTable, max_mean_deviation: Optional[float] = 1.0,
                    frequency: float = 0.05, balance: float = 0.3) -> ScreeningReport:
    """
    Screening de sujetos no fiables

    Regla BT.500: por imagen, límites 2σ o √20·σ según la curtosis; P/Q cuentan
    puntuaciones por encima / debajo. Se rechaza si (P+Q)/N > frequency y
    |P−Q|/(P+Q) < balance. Además se rechaza a quien se desvía en media más de
    max_mean_deviation de la media de los demás sujetos (None lo desactiva).

    Returns:
        ScreeningReport con sujetos conservados, rechazados y contadores
    """
    matrix = table.matrix()
    subjects = sorted(matrix.columns)
    values = matrix[subjects].to_numpy()
    rated = ~np.isnan(values)

    if len(subjects) and rated.sum() / max(1, matrix.shape[0]) < 2:
        logger.warning("⚠️ fewer than 2 ratings per image on average; screening is unreliable")

    report = ScreeningReport()
    counters = {s: SubjectScreening(s, n_rated=int(rated[:, k].sum())) for k, s in enumerate(subjects)}

    for row, mask in zip(values, rated):
        scores = row[mask]
        if scores.size < 2 or np.all(scores == scores[0]):
            continue
        mean = scores.mean()
        bound = _outlier_bound(scores)
        for k in np.flatnonzero(mask):
            if row[k] > mean + bound:
                counters[subjects[k]].p += 1
            elif row[k] < mean - bound:
                counters[subjects[k]].q += 1

    row_sums = np.where(rated, values, 0.0).sum(axis=1)
    row_counts = rated.sum(axis=1)
    for k, subject in enumerate(subjects):
        info = counters[subject]
        others = row_counts - rated[:, k]
        usable = rated[:, k] & (others > 0)
        if usable.any():
            loo_mean = (row_sums[usable] - values[usable, k]) / others[usable]
            info.mean_deviation = float(np.mean(np.abs(values[usable, k] - loo_mean)))

        total = info.p + info.q
        if info.n_rated and total / info.n_rated > frequency and abs(info.p - info.q) / total < balance:
            info.rejected, info.reason = True, "bt500"
        elif max_mean_deviation is not None and info.mean_deviation > max_mean_deviation:
            info.rejected, info.reason = True, "mean_deviation"

        (report.rejected if info.rejected else report.kept).append(subject)
        report.subjects[subject] = info

    logger.info(f"📊 Screening: {len(report.kept)} kept, {len(report.rejected)} rejected {report.rejected}")
    return report


def filter_subjects(table: RatingTable, rejected: Iterable[str]) -> RatingTable:
    """Tabla sin los sujetos rechazados"""
    rejected = set(rejected)
    frame = table.frame[~table.frame['subject_id'].isin(rejected)]
    return RatingTable(frame.itertuples(index=False, name=None), table.catalog)
