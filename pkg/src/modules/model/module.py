"""
Base Module
Clase base para bloques con parámetros registrados en un ParamStore
"""

import numpy as np

from src.modules.numerics import ParamStore, Tensor, glorot


class Module:
    """
    Bloque con prefijo de nombres dentro de un ParamStore compartido
    """

    def __init__(self, store: ParamStore, prefix: str, rng: np.random.Generator):
        self.store = store
        self.prefix = prefix
        self.rng = rng

    def name(self, suffix: str) -> str:
        return f"{self.prefix}.{suffix}"

    def add_weight(self, suffix: str, shape, fan_in: int, fan_out: int) -> Tensor:
        return self.store.add(self.name(suffix), glorot(self.rng, fan_in, fan_out, shape))

    def add_bias(self, suffix: str, size: int) -> Tensor:
        return self.store.add(self.name(suffix), np.zeros(size))

    def add_norm(self, suffix: str, size: int):
        """(gamma, beta) de una LayerNorm"""
        gamma = self.store.add(self.name(f"{suffix}.gamma"), np.ones(size))
        beta = self.store.add(self.name(f"{suffix}.beta"), np.zeros(size))
        return gamma, beta

    def add_linear(self, suffix: str, fan_in: int, fan_out: int):
        weight = self.add_weight(f"{suffix}.w", (fan_in, fan_out), fan_in, fan_out)
        return weight, self.add_bias(f"{suffix}.b", fan_out)

    def add_conv(self, suffix: str, kernel: int, cin: int, cout: int):
        fan_in, fan_out = kernel * kernel * cin, kernel * kernel * cout
        weight = self.add_weight(f"{suffix}.w", (kernel, kernel, cin, cout), fan_in, fan_out)
        return weight, self.add_bias(f"{suffix}.b", cout)
