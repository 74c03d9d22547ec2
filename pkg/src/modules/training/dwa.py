"""
Dynamic Weight Averaging
Pesos de tarea a partir de la tasa relativa de descenso de cada pérdida
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Sequence

import numpy as np

from src.modules.errors import ArgumentError

logger = logging.getLogger(__name__)


@dataclass
class DwaState:
    """Temperatura T, nº de tareas y las dos últimas pérdidas por tarea"""

    T: float = 2.0
    n_tasks: int = 2
    history: Deque[np.ndarray] = field(default_factory=lambda: deque(maxlen=2))

    def update(self, losses: Sequence[float]):
        losses = np.asarray(losses, dtype=np.float64)
        if losses.shape != (self.n_tasks,):
            raise ArgumentError(f"expected {self.n_tasks} task losses, got {losses.shape}")
        self.history.append(losses)

    @property
    def iteration(self) -> int:
        """Iteración t (1-based) para la que se pedirán los pesos"""
        return len(self.history) + 1


def dwa_weights(state: DwaState) -> np.ndarray:
    """
    λ_k = K·exp(w_k/T) / Σ exp(w_i/T), con w_k = L_k(t−1) / L_k(t−2)
    Sin historial completo (t ∈ {1, 2}) devuelve unos
    """
    k = state.n_tasks
    if len(state.history) < 2:
        return np.ones(k)

    previous, before = state.history[-1], state.history[-2]
    zero = before == 0.0
    if np.any(zero):
        logger.warning(f"⚠️ zero historical loss for tasks {np.flatnonzero(zero).tolist()}; using ratio 1")
    ratios = np.where(zero, 1.0, previous / np.where(zero, 1.0, before))

    logits = ratios / state.T
    e = np.exp(logits - logits.max())
    lambdas = k * e / e.sum()
    # la suma es exactamente K
    lambdas[-1] = k - lambdas[:-1].sum()
    return lambdas
