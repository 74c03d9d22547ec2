"""
Run Configuration
Configuración de ejecución: fichero TOML plano (claves con puntos) + flags que lo sobrescriben
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from src.config.settings import settings
from src.modules.errors import ConfigError
from src.modules.model import ModelConfig
from src.modules.training import LossConfig, TrainConfig

logger = logging.getLogger(__name__)


def _int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    as_float = float(value)
    if not as_float.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(as_float)


def _bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _tuple_of(convert: Callable[[Any], Any]) -> Callable[[Any], Tuple]:
    def parse(value: Any) -> Tuple:
        items = value.split(',') if isinstance(value, str) else list(value)
        return tuple(convert(v) for v in items)
    return parse


# clave -> (destino, campo, conversor)
KEYS: Dict[str, Tuple[str, str, Callable[[Any], Any]]] = {
    'plan.m': ('model', 'm', _int),
    'plan.offset_deg': ('model', 'offset_deg', float),
    'plan.fov': ('model', 'fov', float),
    'plan.size': ('model', 'size', _int),
    'plan.lon0': ('model', 'lon0_deg', float),
    'model.k': ('model', 'k', _int),
    'model.depths': ('backbone', 'depths', _tuple_of(_int)),
    'model.dims': ('backbone', 'dims', _tuple_of(_int)),
    'model.heads': ('backbone', 'heads', _tuple_of(_int)),
    'model.kernel': ('backbone', 'kernel', _int),
    'model.embed_dim': ('backbone', 'embed_dim', _int),
    'model.mlp_ratio': ('backbone', 'mlp_ratio', float),
    'loss.gamma': ('loss', 'gamma', float),
    'loss.clamp_eps': ('loss', 'clamp_eps', float),
    'loss.dwa_t': ('loss', 'dwa_t', float),
    'loss.task_weights': ('loss', 'task_weights', _tuple_of(float)),
    'train.batch_size': ('train', 'batch_size', _int),
    'train.epochs': ('train', 'epochs', _int),
    'train.lr_init': ('train', 'lr_init', float),
    'train.lr_min': ('train', 'lr_min', float),
    'train.train_fraction': ('train', 'train_fraction', float),
    'ablate.no_dspn': ('ablate', 'enable_dspn', _bool),
    'ablate.no_msfs': ('ablate', 'enable_msfs', _bool),
    'ablate.no_vpfs': ('ablate', 'enable_vpfs', _bool),
    'seed': ('train', 'seed', _int),
}


def flatten(table: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """{"plan": {"m": 8}} -> {"plan.m": 8}"""
    flat = {}
    for key, value in table.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, dotted + "."))
        else:
            flat[dotted] = value
    return flat


def normalize_key(key: str) -> str:
    """Las flags usan guiones (--plan.offset-deg); las claves, guiones bajos"""
    return key.lstrip('-').replace('-', '_')


@dataclass
class RunConfig:
    """
    Configuración resuelta de una ejecución: valores del fichero con las flags aplicadas encima
    """

    values: Dict[str, Any] = field(default_factory=dict)
    toy: bool = False
    source: Optional[str] = None

    def __post_init__(self):
        converted = {}
        for raw_key, value in self.values.items():
            key = normalize_key(raw_key)
            if key not in KEYS:
                raise ConfigError(f"unknown configuration key '{raw_key}'")
            try:
                converted[key] = KEYS[key][2](value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"invalid value for '{key}': {e}") from e
        self.values = converted

    @classmethod
    def load(cls, path: Union[str, Path, None] = None, overrides: Optional[Mapping[str, Any]] = None,
             toy: bool = False) -> "RunConfig":
        """
        Leer el TOML (opcional) y aplicar las flags que no sean None

        Raises:
            ConfigError: fichero ilegible, TOML inválido o claves desconocidas
        """
        values: Dict[str, Any] = {}
        if path is not None:
            try:
                with open(path, 'rb') as f:
                    values = flatten(tomllib.load(f))
            except OSError as e:
                raise ConfigError(f"cannot read config {path}: {e}") from e
            except tomllib.TOMLDecodeError as e:
                raise ConfigError(f"invalid TOML in {path}: {e}") from e

        for key, value in (overrides or {}).items():
            if value is not None:
                values[normalize_key(key)] = value
        return cls(values, toy, str(path) if path is not None else None)

    def _section(self, target: str) -> Dict[str, Any]:
        return {fname: value for key, value in self.values.items()
                for dest, fname, _ in [KEYS[key]] if dest == target}

    @property
    def seed(self) -> int:
        return self.values.get('seed', settings.SEED)

    def to_model_config(self) -> ModelConfig:
        base = ModelConfig.toy() if self.toy else ModelConfig()
        backbone = replace(base.backbone, **self._section('backbone'))
        ablations = {fname: not flag for fname, flag in self._section('ablate').items()}
        try:
            return replace(base, backbone=backbone, **self._section('model'), **ablations)
        except TypeError as e:
            raise ConfigError(f"invalid model configuration: {e}") from e

    def to_loss_config(self) -> LossConfig:
        return LossConfig(**self._section('loss'))

    def to_train_config(self) -> TrainConfig:
        section = self._section('train')
        section['seed'] = self.seed
        return TrainConfig(**section)

    def resolved(self) -> Dict[str, Any]:
        """Configuración completa, con valores por defecto incluidos"""
        return {
            "source": self.source,
            "toy": self.toy,
            "seed": self.seed,
            "model": self.to_model_config().to_dict(),
            "loss": self.to_loss_config().to_dict(),
            "train": self.to_train_config().to_dict(),
        }

    def log_resolved(self) -> Dict[str, Any]:
        resolved = self.resolved()
        logger.info(f"📋 Resolved config: {resolved}")
        return resolved
