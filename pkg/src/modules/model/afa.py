"""
Adaptive Feature Aggregation
Unificación multi-escala (AFA), selector de stages (MSFS) y vector de tarea
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from src.modules.numerics import ParamStore, Tensor
from src.modules.numerics import functional as F
from .config import ModelConfig, N_STAGES
from .module import Module

logger = logging.getLogger(__name__)


class AdaptiveFeatureAggregation(Module):
    """
    AFA para una tarea (dspn o qspn): parámetros propios por tarea
    Convierte la pirámide de 4 stages en el TaskVector de longitud ΣC
    """

    def __init__(self, store: ParamStore, rng: np.random.Generator, config: ModelConfig, task: str):
        super().__init__(store, f"afa_{task}", rng)
        self.task = task
        self.config = config
        self.widths = config.afa_dims
        self.enable_msfs = config.enable_msfs
        # hook de depuración: gates fijos (N_STAGES,) por escala
        self.force_gate: Optional[np.ndarray] = None

        dims = config.backbone.dims
        self.proj = [
            [self.add_linear(f"scale{s}.proj{i}", dims[i], width) for i in range(N_STAGES)]
            for s, width in enumerate(self.widths)
        ]
        self.selector = [
            (self.add_linear(f"scale{s}.msfs.fc1", N_STAGES * width, width),
             self.add_linear(f"scale{s}.msfs.fc2", width, N_STAGES))
            for s, width in enumerate(self.widths)
        ]
        self.norms = [self.add_norm(f"scale{s}.norm", width) for s, width in enumerate(self.widths)]

    def unify(self, pyramid: Sequence[Tensor]) -> List[Tensor]:
        """
        afa_unify: por escala, 1x1 a ancho común, resize bilineal y stack en eje de stages

        Returns:
            3 tensores (N, 4, h_s, w_s, width_s) para h_s = H/8, H/16, H/32
        """
        targets = [pyramid[0].shape[1:3], pyramid[1].shape[1:3], pyramid[2].shape[1:3]]
        stacked = []
        for s, (th, tw) in enumerate(targets):
            maps = [
                F.bilinear_resize(F.conv1x1(stage_map, *self.proj[s][i]), th, tw)
                for i, stage_map in enumerate(pyramid)
            ]
            stacked.append(F.stack(maps, axis=1))
        return stacked

    def gates(self, stacked: Tensor, scale: int) -> Tensor:
        """softmax(MLP(concat de GAP por stage)) -> (N, 4)"""
        n = stacked.shape[0]
        if self.force_gate is not None:
            return Tensor(np.broadcast_to(np.asarray(self.force_gate, dtype=stacked.dtype), (n, N_STAGES)).copy())
        if not self.enable_msfs:
            return Tensor(np.full((n, N_STAGES), 1.0 / N_STAGES, dtype=stacked.dtype))

        pooled = stacked.mean(axis=(2, 3)).reshape(n, -1)
        (w1, b1), (w2, b2) = self.selector[scale]
        return F.softmax(F.mlp(pooled, w1, b1, w2, b2), axis=-1)

    def fuse(self, stacked: Sequence[Tensor]) -> List[Tensor]:
        """msfs_fuse: suma ponderada por los gates sobre el eje de stages"""
        return [F.einsum('ns,nshwc->nhwc', self.gates(maps, s), maps) for s, maps in enumerate(stacked)]

    def pool_concat(self, fused: Sequence[Tensor]) -> Tensor:
        """LN + GAP por escala y concatenación -> (N, ΣC)"""
        pooled = [F.global_avg_pool(F.layer_norm(f, *self.norms[s])) for s, f in enumerate(fused)]
        return F.concat(pooled, axis=-1)

    def __call__(self, pyramid: Sequence[Tensor]) -> Tensor:
        return self.pool_concat(self.fuse(self.unify(pyramid)))
