"""
NAT Backbone
Patch embedding y backbone de 4 stages con bloques de atención por vecindario
"""

import logging
from typing import List

import numpy as np

from src.modules.errors import ArgumentError
from src.modules.numerics import ParamStore, Tensor
from src.modules.numerics import functional as F
from .config import BackboneConfig
from .module import Module

logger = logging.getLogger(__name__)

# estandarización de píxeles ImageNet (RGB en [0, 1])
PIXEL_MEAN = np.array([0.485, 0.456, 0.406])
PIXEL_STD = np.array([0.229, 0.224, 0.225])


class PatchEmbed(Module):
    """
    Dos convoluciones 3x3 stride 2 con LayerNorm: (H, W, 3) -> (H/4, W/4, C)
    Los píxeles se estandarizan antes de la primera convolución; LN + GELU entre ambas
    """

    def __init__(self, store: ParamStore, rng: np.random.Generator, embed_dim: int, size: int, prefix: str = "embed"):
        super().__init__(store, prefix, rng)
        self.size = size
        self.conv1 = self.add_conv("conv1", 3, 3, embed_dim)
        self.norm1 = self.add_norm("norm1", embed_dim)
        self.conv2 = self.add_conv("conv2", 3, embed_dim, embed_dim)
        self.norm2 = self.add_norm("norm2", embed_dim)

    def __call__(self, x: Tensor) -> Tensor:
        if x.ndim != 4 or x.shape[1:] != (self.size, self.size, 3):
            raise ArgumentError(f"patch_embed expects (N, {self.size}, {self.size}, 3), got {x.shape}")
        x = (x - PIXEL_MEAN) * (1.0 / PIXEL_STD)
        x = F.conv2d(x, *self.conv1, stride=2, padding=1)
        x = F.gelu(F.layer_norm(x, *self.norm1))
        x = F.conv2d(x, *self.conv2, stride=2, padding=1)
        return F.layer_norm(x, *self.norm2)


class Downsampler(Module):
    """Conv 3x3 stride 2 + LN entre stages"""

    def __init__(self, store, rng, cin: int, cout: int, prefix: str):
        super().__init__(store, prefix, rng)
        self.conv = self.add_conv("conv", 3, cin, cout)
        self.norm = self.add_norm("norm", cout)

    def __call__(self, x: Tensor) -> Tensor:
        return F.layer_norm(F.conv2d(x, *self.conv, stride=2, padding=1), *self.norm)


class Projection(Module):
    """Proyección 1x1 antes del stage 4 cuando C3 != C4"""

    def __init__(self, store, rng, cin: int, cout: int, prefix: str):
        super().__init__(store, prefix, rng)
        self.linear = self.add_linear("proj", cin, cout)

    def __call__(self, x: Tensor) -> Tensor:
        return F.conv1x1(x, *self.linear)


class NatBlock(Module):
    """
    Bloque NAT pre-norm: x + NA(LN(x)), luego x + MLP(LN(x))
    """

    def __init__(self, store, rng, dim: int, heads: int, kernel: int, mlp_ratio: float, prefix: str):
        super().__init__(store, prefix, rng)
        self.heads = heads
        self.kernel = kernel
        hidden = max(1, int(round(dim * mlp_ratio)))
        self.norm1 = self.add_norm("norm1", dim)
        self.qkv = self.add_linear("attn.qkv", dim, 3 * dim)
        self.proj = self.add_linear("attn.proj", dim, dim)
        self.norm2 = self.add_norm("norm2", dim)
        self.fc1 = self.add_linear("mlp.fc1", dim, hidden)
        self.fc2 = self.add_linear("mlp.fc2", hidden, dim)
        # sustituible por full attention (comparaciones de equivalencia)
        self.use_full_attention = False

    def __call__(self, x: Tensor) -> Tensor:
        h = F.layer_norm(x, *self.norm1)
        if self.use_full_attention:
            h = F.full_attention(h, *self.qkv, *self.proj, heads=self.heads)
        else:
            h = F.neighborhood_attention(h, *self.qkv, *self.proj, kernel=self.kernel, heads=self.heads)
        x = x + h
        h = F.mlp(F.layer_norm(x, *self.norm2), *self.fc1, *self.fc2)
        return x + h


class Backbone(Module):
    """
    Backbone de 4 stages: downsampler stride 2 antes de los stages 1-3,
    ninguno antes del stage 4; salidas en H/8, H/16, H/32, H/32
    """

    def __init__(self, store: ParamStore, rng: np.random.Generator, config: BackboneConfig, prefix: str = "backbone"):
        super().__init__(store, prefix, rng)
        self.config = config
        self.transitions: List[Module] = []
        self.stages: List[List[NatBlock]] = []

        cin = config.embed_dim
        for i, (depth, dim, heads) in enumerate(zip(config.depths, config.dims, config.heads)):
            if i < 3:
                self.transitions.append(Downsampler(store, rng, cin, dim, self.name(f"down{i + 1}")))
            elif cin != dim:
                self.transitions.append(Projection(store, rng, cin, dim, self.name(f"proj{i + 1}")))
            else:
                self.transitions.append(None)
            self.stages.append([
                NatBlock(store, rng, dim, heads, config.kernel, config.mlp_ratio, self.name(f"stage{i + 1}.block{b}"))
                for b in range(depth)
            ])
            cin = dim

    def blocks(self) -> List[NatBlock]:
        return [block for stage in self.stages for block in stage]

    def __call__(self, x: Tensor) -> List[Tensor]:
        """Devuelve la FeaturePyramid: las 4 salidas de stage"""
        pyramid = []
        for transition, stage in zip(self.transitions, self.stages):
            if transition is not None:
                x = transition(x)
            for block in stage:
                x = block(x)
            pyramid.append(x)
        return pyramid
