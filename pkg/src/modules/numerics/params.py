"""
Parameter Store
Parámetros con nombre, buffers de gradiente y momentos del optimizador
"""

import logging
from typing import Dict, Iterator, List, Tuple

import numpy as np

from src.modules.errors import ArgumentError, CheckpointError
from .tensor import Tensor

logger = logging.getLogger(__name__)


class ParamStore:
    """
    Mapa nombre -> Tensor hoja con requires_grad
    Los gradientes empiezan sin asignar (None); zero_grad los pone a cero
    """

    def __init__(self, dtype=np.float32):
        self.dtype = np.dtype(dtype)
        self._params: Dict[str, Tensor] = {}
        # momentos de Adam (se crean en el primer paso)
        self.moments: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}
        self.step_count = 0

    def add(self, name: str, value: np.ndarray) -> Tensor:
        """Registrar un parámetro nuevo"""
        if name in self._params:
            raise ArgumentError(f"duplicate parameter name '{name}'")
        param = Tensor(np.array(value, dtype=self.dtype), requires_grad=True, name=name)
        self._params[name] = param
        return param

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def names(self) -> List[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    @property
    def num_values(self) -> int:
        return int(sum(p.data.size for p in self._params.values()))

    def zero_grad(self):
        for param in self._params.values():
            param.grad = np.zeros_like(param.data)

    def ensure_grads(self):
        """Parámetros no alcanzados por backward reciben gradiente cero"""
        for param in self._params.values():
            if param.grad is None:
                param.grad = np.zeros_like(param.data)

    def missing_grads(self) -> List[str]:
        return [name for name, p in self._params.items() if p.grad is None]

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self._params.items()}

    def load_state_dict(self, state: Dict[str, np.ndarray], strict: bool = True):
        """Cargar valores; nombres o formas incompatibles -> CheckpointError"""
        if strict:
            missing = sorted(set(self._params) - set(state))
            unexpected = sorted(set(state) - set(self._params))
            if missing or unexpected:
                raise CheckpointError(f"parameter mismatch: missing={missing[:5]} unexpected={unexpected[:5]}")
        for name, value in state.items():
            if name not in self._params:
                continue
            param = self._params[name]
            if tuple(value.shape) != param.shape:
                raise CheckpointError(f"shape mismatch for '{name}': {tuple(value.shape)} vs {param.shape}")
            param.data = np.array(value, dtype=self.dtype)
            param.grad = None
        self.moments.clear()
        self.step_count = 0

    def astype(self, dtype) -> "ParamStore":
        """Copia con otro dtype (doble precisión para gradient checks)"""
        other = ParamStore(dtype)
        for name, param in self._params.items():
            other.add(name, param.data)
        return other


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    """Inicialización Xavier uniforme"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)
