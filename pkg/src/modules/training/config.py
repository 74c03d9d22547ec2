"""
Training Configuration
Configuración de pérdidas y del bucle de entrenamiento
"""

from dataclasses import asdict, dataclass
from typing import Optional, Tuple

from src.modules.errors import ConfigError


@dataclass(frozen=True)
class LossConfig:
    """γ y ε de Norm-in-Norm, clamp de la entropía cruzada y temperatura DWA"""

    gamma: float = 1.0
    epsilon_mode: str = "bound"
    clamp_eps: float = 1e-7
    dwa_t: float = 2.0
    # pesos fijos (λ_dspn, λ_qspn); si se dan, sustituyen a DWA
    task_weights: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.gamma not in (1, 2):
            raise ConfigError(f"gamma must be 1 or 2, got {self.gamma}")
        if self.epsilon_mode != "bound":
            raise ConfigError(f"unknown epsilon_mode '{self.epsilon_mode}'")
        if not self.clamp_eps > 0:
            raise ConfigError(f"clamp_eps must be positive, got {self.clamp_eps}")
        if not self.dwa_t > 0:
            raise ConfigError(f"DWA temperature must be positive, got {self.dwa_t}")
        if self.task_weights is not None:
            weights = tuple(float(w) for w in self.task_weights)
            if len(weights) != 2 or any(w < 0 for w in weights):
                raise ConfigError(f"task_weights must be two non-negative reals, got {self.task_weights}")
            object.__setattr__(self, 'task_weights', weights)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    epochs: int = 50
    lr_init: float = 1e-4
    lr_min: float = 1e-6
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 2:
            raise ConfigError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not (0 < self.lr_min <= self.lr_init):
            raise ConfigError(f"need 0 < lr_min <= lr_init, got {self.lr_min}, {self.lr_init}")
        if not (0.0 < self.train_fraction < 1.0):
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")

    @property
    def split(self) -> Tuple[float, float]:
        return self.train_fraction, 1.0 - self.train_fraction

    def to_dict(self):
        return asdict(self)
