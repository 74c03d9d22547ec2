"""
Model Configuration
Configuración de backbone y red completa (valores por defecto a escala de escritorio)
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Tuple

from src.modules.errors import ConfigError

N_STAGES = 4
N_SITUATIONS = 4


@dataclass(frozen=True)
class BackboneConfig:
    """Profundidades, anchos, cabezas y kernel de los 4 stages NAT"""

    depths: Tuple[int, ...] = (2, 2, 5, 3)
    dims: Tuple[int, ...] = (16, 32, 64, 64)
    heads: Tuple[int, ...] = (2, 4, 8, 8)
    kernel: int = 7
    embed_dim: int = 16
    mlp_ratio: float = 2.0

    def __post_init__(self):
        for name in ('depths', 'dims', 'heads'):
            value = tuple(int(v) for v in getattr(self, name))
            if len(value) != N_STAGES:
                raise ConfigError(f"backbone {name} needs {N_STAGES} entries, got {value}")
            object.__setattr__(self, name, value)
        if any(d < 0 for d in self.depths):
            raise ConfigError(f"negative depth in {self.depths}")
        if any(c < 1 for c in self.dims) or self.embed_dim < 1:
            raise ConfigError("channel widths must be positive")
        for dim, heads in zip(self.dims, self.heads):
            if heads < 1 or dim % heads:
                raise ConfigError(f"dim {dim} not divisible by heads {heads}")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ConfigError(f"attention kernel must be odd, got {self.kernel}")


@dataclass(frozen=True)
class ModelConfig:
    """
    Configuración completa: plan de viewports, backbone, K y ablaciones
    """

    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    m: int = 8
    k: int = 4
    offset_deg: float = 45.0
    fov: float = 90.0
    size: int = 224
    lon0_deg: float = -180.0
    enable_dspn: bool = True
    enable_msfs: bool = True
    enable_vpfs: bool = True

    def __post_init__(self):
        if not (1 <= self.k <= self.m):
            raise ConfigError(f"K must satisfy 1 <= K <= M, got K={self.k}, M={self.m}")
        if self.size % 32:
            raise ConfigError(f"viewport size must be a multiple of 32, got {self.size}")

    @property
    def afa_dims(self) -> Tuple[int, int, int]:
        """Anchos por escala (H/8, H/16, H/32); la escala H/32 aloja los stages 3 y 4"""
        c1, c2, c3, c4 = self.backbone.dims
        return c1, c2, c3 + c4

    @property
    def task_dim(self) -> int:
        """Longitud del TaskVector: C1 + C2 + C3 + C4"""
        return sum(self.afa_dims)

    @property
    def stage_sizes(self) -> Tuple[int, ...]:
        s = self.size
        return s // 8, s // 16, s // 32, s // 32

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['backbone'] = {k: list(v) if isinstance(v, tuple) else v for k, v in data['backbone'].items()}
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        data = dict(data)
        try:
            backbone = BackboneConfig(**{k: tuple(v) if isinstance(v, list) else v
                                         for k, v in data.pop('backbone', {}).items()})
            return cls(backbone=backbone, **data)
        except TypeError as e:
            raise ConfigError(f"invalid model config: {e}") from e

    @classmethod
    def toy(cls, **overrides) -> "ModelConfig":
        """Configuración de juguete: anchos 4, viewports 64x64, kernel 3"""
        backbone = BackboneConfig(dims=(4, 4, 4, 4), heads=(1, 1, 1, 1), kernel=3, embed_dim=4)
        return cls(backbone=backbone, size=64, **overrides)
