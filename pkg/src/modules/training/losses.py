"""
Training Losses
Entropía cruzada multiclase (DSPN), Norm-in-Norm (QSPN) y pérdida total
"""

import logging
import math
from typing import Sequence, Union

import numpy as np

from src.modules.errors import ArgumentError
from src.modules.model import N_SITUATIONS
from src.modules.numerics import Tensor
from .config import LossConfig

logger = logging.getLogger(__name__)

NORM_FLOOR = 1e-16


def ce_loss(probs: Tensor, targets: Sequence[int], cfg: LossConfig = LossConfig()) -> Tensor:
    """
    Media de −log p(clase verdadera), con probabilidades recortadas a [eps, 1 − eps]

    Args:
        probs: (B, 4) filas que suman 1
        targets: B enteros en {0..3}
    """
    targets = np.asarray(targets, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[1] != N_SITUATIONS or targets.shape != (probs.shape[0],):
        raise ArgumentError(f"ce_loss shape mismatch: probs {probs.shape}, targets {targets.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= N_SITUATIONS):
        raise ArgumentError(f"targets must lie in 0..{N_SITUATIONS - 1}")

    picked = probs.clip(cfg.clamp_eps, 1.0 - cfg.clamp_eps)[np.arange(targets.size), targets]
    return -picked.log().mean()


def _normalize(x: Tensor) -> Tensor:
    centered = x - x.mean()
    return centered / ((centered * centered).sum() + NORM_FLOOR).sqrt()


def norm_in_norm_loss(pred: Tensor, mos: Union[Sequence[float], np.ndarray], cfg: LossConfig = LossConfig()) -> Tensor:
    """
    Norm-in-Norm: ambos vectores se centran y se dividen por su norma L2,
    L = Σ|ŝ − s|^γ / (ε·B) con ε = 1/√B (γ=1) o ε = 2/B (γ=2), es decir factor 1/√B o 1/2;
    ambas acotan L en [0, 2]

    Un batch con MOS constante cae a error absoluto medio (con aviso)
    """
    mos = np.asarray(mos, dtype=pred.dtype).reshape(-1)
    pred = pred.reshape(-1)
    batch = pred.shape[0]
    if batch < 2:
        raise ArgumentError(f"norm_in_norm_loss needs a batch of at least 2, got {batch}")
    if mos.shape != (batch,):
        raise ArgumentError(f"pred/mos length mismatch: {batch} vs {mos.shape}")

    if np.ptp(mos) == 0.0:
        logger.warning("⚠️ constant MOS in batch; falling back to mean absolute error")
        return (pred - mos).abs().mean()

    diff = _normalize(pred) - _normalize(Tensor(mos))
    if cfg.gamma == 1:
        return diff.abs().sum() * (1.0 / math.sqrt(batch))
    return (diff * diff).sum() * 0.5


def total_loss(l_dspn, l_qspn, lambdas: Sequence[float]):
    """L_total = λ1·L_dspn + λ2·L_qspn"""
    if len(lambdas) != 2:
        raise ArgumentError(f"expected two task weights, got {lambdas}")
    return l_dspn * float(lambdas[0]) + l_qspn * float(lambdas[1])
