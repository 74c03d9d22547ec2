"""
Prediction Heads
DSPN (situación de distorsión), VPFS (selector de viewports) y QSPN (regresión de calidad)
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.modules.errors import ArgumentError
from src.modules.numerics import ParamStore, Tensor
from src.modules.numerics import functional as F
from .config import ModelConfig, N_SITUATIONS
from .module import Module

logger = logging.getLogger(__name__)


class DistortionSituationHead(Module):
    """
    DSPN: concatenación ordenada de los M vectores, MLP a 4 logits y softmax
    """

    def __init__(self, store: ParamStore, rng: np.random.Generator, config: ModelConfig):
        super().__init__(store, "dspn", rng)
        self.m = config.m
        width = config.m * config.task_dim
        self.fc1 = self.add_linear("fc1", width, config.task_dim)
        self.fc2 = self.add_linear("fc2", config.task_dim, N_SITUATIONS)

    def __call__(self, vectors: Tensor) -> Tensor:
        """vectors (B, M, ΣC) -> probs (B, 4)"""
        if vectors.ndim != 3 or vectors.shape[1] != self.m:
            raise ArgumentError(f"dspn expects (B, {self.m}, C) vectors, got {vectors.shape}")
        flat = vectors.reshape(vectors.shape[0], -1)
        return F.softmax(F.mlp(flat, *self.fc1, *self.fc2), axis=-1)


@dataclass
class SelectionResult:
    """Salida del VPFS"""

    weights: Tensor          # (B, M) ya enmascarados
    raw_weights: Tensor      # (B, M) antes del top-K
    selected: np.ndarray     # (B, K) índices de viewport
    weighted: Tensor         # (B, M, ΣC) = w^m ⊙ v^m
    merged: Tensor           # (B, ΣC)


class ViewportFeatureSelector(Module):
    """
    VPFS: suma de los M vectores, conv 1x1 + MLP + softmax a M pesos,
    top-K (empates al índice menor) y enmascarado del resto a cero exacto
    """

    def __init__(self, store: ParamStore, rng: np.random.Generator, config: ModelConfig):
        super().__init__(store, "vpfs", rng)
        self.m = config.m
        c = config.task_dim
        hidden = max(1, c // 2)
        self.mix = self.add_linear("conv", c, c)
        self.fc1 = self.add_linear("fc1", c, hidden)
        self.fc2 = self.add_linear("fc2", hidden, config.m)

    def __call__(self, vectors: Tensor, k: int) -> SelectionResult:
        if vectors.ndim != 3 or vectors.shape[1] != self.m:
            raise ArgumentError(f"vpfs expects (B, {self.m}, C) vectors, got {vectors.shape}")
        if not (1 <= k <= self.m):
            raise ArgumentError(f"K must satisfy 1 <= K <= {self.m}, got {k}")

        merged = F.sorted_sum(vectors, axis=1)
        mixed = F.conv1x1(merged, *self.mix)
        raw = F.softmax(F.mlp(mixed, *self.fc1, *self.fc2), axis=-1)

        order = np.argsort(-raw.data, axis=-1, kind='stable')
        selected = order[:, :k]
        mask = np.zeros(raw.shape, dtype=raw.dtype)
        np.put_along_axis(mask, selected, 1.0, axis=-1)
        weights = raw * mask

        weighted = vectors * weights.reshape(weights.shape[0], self.m, 1)
        return SelectionResult(weights, raw, selected, weighted, merged)


class QualityRegressionHead(Module):
    """
    QSPN: regresión f_R (dos capas, oculta ΣC/2, GELU) por viewport seleccionado;
    la puntuación es la media de las K salidas
    """

    def __init__(self, store: ParamStore, rng: np.random.Generator, config: ModelConfig):
        super().__init__(store, "qspn", rng)
        c = config.task_dim
        hidden = max(1, c // 2)
        self.fc1 = self.add_linear("fc1", c, hidden)
        self.fc2 = self.add_linear("fc2", hidden, 1)

    def viewport_scores(self, vectors: Tensor) -> Tensor:
        """(B, K, ΣC) -> (B, K)"""
        out = F.mlp(vectors, *self.fc1, *self.fc2)
        return out.reshape(out.shape[0], out.shape[1])

    def __call__(self, vectors: Tensor):
        """Returns: (score (B,), viewport_scores (B, K))"""
        scores = self.viewport_scores(vectors)
        return scores.mean(axis=1), scores
