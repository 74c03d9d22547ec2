"""
Training Package
Pérdidas, DWA, optimizador, dataset y bucle de entrenamiento
"""

from .config import LossConfig, TrainConfig
from .losses import ce_loss, norm_in_norm_loss, total_loss
from .dwa import DwaState, dwa_weights
from .optim import adam_step, cosine_lr
from .dataset import ManifestEntry, ViewportDataset, read_manifest, split_indices, iterate_batches
from .trainer import (
    EpochRecord,
    TrainResult,
    Trainer,
    SITUATION_NAMES,
    evaluate,
    predict_arrays,
    train,
    model_gradcheck,
    gradcheck_config,
)

__all__ = [
    'LossConfig',
    'TrainConfig',
    'ce_loss',
    'norm_in_norm_loss',
    'total_loss',
    'DwaState',
    'dwa_weights',
    'adam_step',
    'cosine_lr',
    'ManifestEntry',
    'ViewportDataset',
    'read_manifest',
    'split_indices',
    'iterate_batches',
    'EpochRecord',
    'TrainResult',
    'Trainer',
    'SITUATION_NAMES',
    'evaluate',
    'predict_arrays',
    'train',
    'model_gradcheck',
    'gradcheck_config',
]
