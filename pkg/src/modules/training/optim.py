"""
Optimizer and Schedule
Adam con corrección de sesgo y tasa de aprendizaje coseno por época
"""

import math

import numpy as np

from src.modules.errors import ArgumentError, ModelStateError
from src.modules.numerics import ParamStore
from .config import TrainConfig

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


def adam_step(store: ParamStore, lr: float, betas=ADAM_BETAS, eps: float = ADAM_EPS) -> ParamStore:
    """
    Un paso de Adam sobre todos los parámetros del store

    Raises:
        ModelStateError si algún parámetro no tiene gradiente
    """
    missing = store.missing_grads()
    if missing:
        raise ModelStateError(f"missing gradients for {len(missing)} parameters (e.g. {missing[:3]})")

    beta1, beta2 = betas
    store.step_count += 1
    t = store.step_count
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t

    for name, param in store.items():
        grad = param.grad
        m, v = store.moments.get(name, (np.zeros_like(param.data), np.zeros_like(param.data)))
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        store.moments[name] = (m, v)
        update = lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
        param.data = (param.data - update).astype(store.dtype)
    return store


def cosine_lr(epoch: int, cfg: TrainConfig) -> float:
    """
    lr_min + 0.5·(lr_init − lr_min)·(1 + cos(π·epoch/(epochs − 1)))
    La primera época usa lr_init y la última exactamente lr_min
    """
    last = cfg.epochs - 1
    if not (0 <= epoch <= last):
        raise ArgumentError(f"epoch {epoch} outside [0, {last}]")
    if epoch == 0:
        return cfg.lr_init
    if epoch == last:
        return cfg.lr_min
    return cfg.lr_min + 0.5 * (cfg.lr_init - cfg.lr_min) * (1.0 + math.cos(math.pi * epoch / last))
