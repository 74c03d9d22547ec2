"""
Model Checkpoints
Formato binario "IQC1": bloque de configuración JSON y registros de tensores f32
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from src.modules.errors import ArgumentError, CheckpointError, ConfigError
from .config import ModelConfig
from .network import IQCaption360

logger = logging.getLogger(__name__)

MAGIC = b"IQC1"


def _u32(value: int) -> bytes:
    return np.array([value], dtype='<u4').tobytes()


def save_checkpoint(model: IQCaption360, path: Union[str, Path], extra: Dict[str, Any] = None) -> Path:
    """
    Escribir checkpoint de forma atómica

    Layout (little-endian): magic, u32 longitud + JSON de configuración,
    luego por parámetro: u32 len(nombre), nombre, u32 rango, u32 dims, f32 datos
    """
    model._require_params()
    path = Path(path)
    header = {"config": model.config.to_dict(), "extra": extra or {}}
    config_block = json.dumps(header, sort_keys=True).encode('utf-8')

    chunks = [MAGIC, _u32(len(config_block)), config_block]
    for name, value in model.store.state_dict().items():
        encoded = name.encode('utf-8')
        chunks += [_u32(len(encoded)), encoded, _u32(value.ndim)]
        chunks += [np.asarray(value.shape, dtype='<u4').tobytes(), value.astype('<f4').tobytes()]

    tmp = path.with_name(path.name + '.tmp')
    tmp.write_bytes(b"".join(chunks))
    tmp.replace(path)
    logger.info(f"✅ Checkpoint saved: {path.name} ({len(model.store)} tensors)")
    return path


def read_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Leer (cabecera, tensores) sin construir el modelo"""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CheckpointError(f"unknown checkpoint magic {raw[:4]!r} in {path}")

    def u32(offset):
        if offset + 4 > len(raw):
            raise CheckpointError(f"truncated checkpoint {path}")
        return int(np.frombuffer(raw, dtype='<u4', count=1, offset=offset)[0]), offset + 4

    size, pos = u32(4)
    if pos + size > len(raw):
        raise CheckpointError(f"truncated config block in {path}")
    try:
        header = json.loads(raw[pos:pos + size].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt config block in {path}: {e}") from e
    if not isinstance(header, dict) or not isinstance(header.get("config"), dict):
        raise CheckpointError(f"config block in {path} has no model config")
    pos += size

    tensors = {}
    while pos < len(raw):
        name_len, pos = u32(pos)
        if pos + name_len > len(raw):
            raise CheckpointError(f"truncated tensor name in {path}")
        try:
            name = raw[pos:pos + name_len].decode('utf-8')
        except UnicodeDecodeError as e:
            raise CheckpointError(f"corrupt tensor name in {path}") from e
        pos += name_len
        rank, pos = u32(pos)
        if pos + 4 * rank > len(raw):
            raise CheckpointError(f"truncated shape of '{name}' in {path}")
        shape = tuple(int(d) for d in np.frombuffer(raw, dtype='<u4', count=rank, offset=pos))
        pos += 4 * rank
        count = int(np.prod(shape)) if shape else 1
        if pos + 4 * count > len(raw):
            raise CheckpointError(f"truncated tensor '{name}' in {path}")
        tensors[name] = np.frombuffer(raw, dtype='<f4', count=count, offset=pos).reshape(shape).copy()
        pos += 4 * count
    return header, tensors


def load_checkpoint(path: Union[str, Path], dtype=np.float32) -> IQCaption360:
    """Construir el modelo desde la configuración guardada y cargar los parámetros"""
    header, tensors = read_checkpoint(path)
    try:
        config = ModelConfig.from_dict(header["config"])
    except (ConfigError, ArgumentError) as e:
        raise CheckpointError(f"invalid model config in {path}: {e}") from e
    model = IQCaption360(config, dtype).init_params(0)
    model.store.load_state_dict(tensors)
    logger.info(f"✅ Checkpoint loaded: {Path(path).name}")
    return model
