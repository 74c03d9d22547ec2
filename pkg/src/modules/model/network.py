"""
IQCaption360 Network
Red completa: viewports -> backbone compartido -> AFA x2 -> DSPN + VPFS/QSPN
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.modules.errors import ArgumentError, ModelStateError
from src.modules.geometry import ErpImage, SamplingPlan, equatorial_plan, cut_viewports
from src.modules.numerics import ParamStore, Tensor
from src.modules.numerics import functional as F
from .afa import AdaptiveFeatureAggregation
from .backbone import Backbone, PatchEmbed
from .config import ModelConfig
from .heads import DistortionSituationHead, QualityRegressionHead, ViewportFeatureSelector

logger = logging.getLogger(__name__)


@dataclass
class ModelOutput:
    """Salida por imagen: p̂, ŝ, ŝ^k, w^m y los K índices seleccionados"""

    probs: np.ndarray
    score: float
    viewport_scores: np.ndarray
    weights: np.ndarray
    selected: np.ndarray

    @property
    def situation(self) -> int:
        return int(np.argmax(self.probs))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probs": [float(p) for p in self.probs],
            "score": float(self.score),
            "viewport_scores": [float(s) for s in self.viewport_scores],
            "weights": [float(w) for w in self.weights],
            "selected": [int(i) for i in self.selected],
            "situation": self.situation,
        }


@dataclass
class ForwardResult:
    """Salida diferenciable de un batch (B imágenes)"""

    probs: Tensor               # (B, 4)
    score: Tensor               # (B,)
    viewport_scores: Tensor     # (B, K)
    weights: Tensor             # (B, M)
    selected: np.ndarray        # (B, K)
    v_dspn: Tensor              # (B, M, ΣC)
    v_qspn: Tensor              # (B, M, ΣC)

    def outputs(self) -> List[ModelOutput]:
        return [
            ModelOutput(
                probs=self.probs.data[b].astype(np.float64),
                score=float(self.score.data[b]),
                viewport_scores=self.viewport_scores.data[b].astype(np.float64),
                weights=self.weights.data[b].astype(np.float64),
                selected=self.selected[b].copy(),
            )
            for b in range(self.probs.shape[0])
        ]


class IQCaption360:
    """
    Modelo IQCaption360 a escala de escritorio
    Backbone compartido; AFA y cabezas con parámetros separados por tarea
    """

    def __init__(self, config: Optional[ModelConfig] = None, dtype=np.float32):
        self.config = config or ModelConfig()
        self.dtype = np.dtype(dtype)
        self.store: Optional[ParamStore] = None

    # ==================== PARÁMETROS ====================

    def init_params(self, seed: int = 0) -> "IQCaption360":
        """Crear e inicializar todos los parámetros (determinista dado el seed)"""
        cfg = self.config
        rng = np.random.default_rng(seed)
        store = ParamStore(self.dtype)

        self.embed = PatchEmbed(store, rng, cfg.backbone.embed_dim, cfg.size)
        self.backbone = Backbone(store, rng, cfg.backbone)
        self.afa_dspn = AdaptiveFeatureAggregation(store, rng, cfg, "dspn")
        self.afa_qspn = AdaptiveFeatureAggregation(store, rng, cfg, "qspn")
        self.dspn = DistortionSituationHead(store, rng, cfg)
        self.vpfs = ViewportFeatureSelector(store, rng, cfg)
        self.qspn = QualityRegressionHead(store, rng, cfg)
        self.store = store

        logger.info(f"✅ IQCaption360 initialized: {len(store)} tensors, {store.num_values} values")
        return self

    @property
    def initialized(self) -> bool:
        return self.store is not None

    def _require_params(self):
        if self.store is None:
            raise ModelStateError("model parameters are not loaded; call init_params() or load a checkpoint")

    def load_state(self, state: Dict[str, np.ndarray]) -> "IQCaption360":
        if self.store is None:
            self.init_params(0)
        self.store.load_state_dict(state)
        return self

    def astype(self, dtype) -> "IQCaption360":
        """Copia del modelo con otro dtype (mismos valores)"""
        self._require_params()
        other = IQCaption360(self.config, dtype).init_params(0)
        other.store.load_state_dict(self.store.state_dict())
        return other

    def set_full_attention(self, enabled: bool):
        self._require_params()
        for block in self.backbone.blocks():
            block.use_full_attention = enabled

    # ==================== VIEWPORTS ====================

    @property
    def plan(self) -> SamplingPlan:
        cfg = self.config
        return equatorial_plan(cfg.m, cfg.offset_deg, cfg.fov, cfg.size, cfg.lon0_deg)

    def cut_viewports(self, image: ErpImage) -> np.ndarray:
        """ERP -> (M, S, S, 3) en el orden del plan"""
        return cut_viewports(image, self.plan, self.dtype)

    # ==================== FORWARD ====================

    def features(self, viewports: Tensor):
        """(B, M, S, S, 3) -> (v_dspn, v_qspn), cada uno (B, M, ΣC)"""
        b, m = viewports.shape[:2]
        flat = viewports.reshape(b * m, *viewports.shape[2:])
        pyramid = self.backbone(self.embed(flat))
        v_dspn = self.afa_dspn(pyramid).reshape(b, m, -1)
        v_qspn = self.afa_qspn(pyramid).reshape(b, m, -1)
        return v_dspn, v_qspn

    def forward(self, viewports: Union[np.ndarray, Tensor]) -> ForwardResult:
        """
        Pasada completa sobre un batch de viewports ya cortados

        Args:
            viewports: (B, M, S, S, 3)

        Returns:
            ForwardResult con tensores diferenciables
        """
        self._require_params()
        cfg = self.config
        x = viewports if isinstance(viewports, Tensor) else Tensor(np.asarray(viewports, dtype=self.dtype))
        if x.ndim != 5 or x.shape[1] != cfg.m or x.shape[2:] != (cfg.size, cfg.size, 3):
            raise ArgumentError(f"expected viewports (B, {cfg.m}, {cfg.size}, {cfg.size}, 3), got {x.shape}")

        v_dspn, v_qspn = self.features(x)
        probs = self.dspn(v_dspn)
        b, m, c = v_qspn.shape

        if cfg.enable_vpfs:
            selection = self.vpfs(v_qspn, cfg.k)
            flat_index = selection.selected + (np.arange(b) * m)[:, None]
            chosen = F.take(selection.weighted.reshape(b * m, c), flat_index, axis=0)
            score, viewport_scores = self.qspn(chosen)
            weights, selected = selection.weights, selection.selected
        else:
            score, viewport_scores = self.qspn(v_qspn)
            weights = Tensor(np.ones((b, m), dtype=self.dtype))
            selected = np.broadcast_to(np.arange(m), (b, m)).copy()

        return ForwardResult(probs, score, viewport_scores, weights, selected, v_dspn, v_qspn)

    def predict(self, image: Union[ErpImage, np.ndarray]) -> ModelOutput:
        """
        model_forward: ERP completa o viewports (M, S, S, 3) ya cortados -> ModelOutput
        """
        self._require_params()
        views = self.cut_viewports(image) if isinstance(image, ErpImage) else np.asarray(image, dtype=self.dtype)
        return self.forward(views[None]).outputs()[0]
