"""
Statistics Package
Datos subjetivos (MOS, screening) y estadísticas de evaluación
"""

from .ratings import (
    RatingTable,
    MosRecord,
    ScreeningReport,
    compute_mos,
    write_mos_csv,
    screen_subjects,
    filter_subjects,
)
from .correlation import (
    LogisticFit,
    CorrelationReport,
    logistic5,
    logistic_fit,
    plcc,
    srcc,
    krcc,
    rmse,
    accuracy,
    correlation_report,
    situation_breakdown,
)

__all__ = [
    'RatingTable',
    'MosRecord',
    'ScreeningReport',
    'compute_mos',
    'write_mos_csv',
    'screen_subjects',
    'filter_subjects',
    'LogisticFit',
    'CorrelationReport',
    'logistic5',
    'logistic_fit',
    'plcc',
    'srcc',
    'krcc',
    'rmse',
    'accuracy',
    'correlation_report',
    'situation_breakdown',
]
