"""
Viewport Sampling Plans
Planes de muestreo: ecuatorial (IQCaption360) y esférico (retícula de Fibonacci)
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from src.modules.errors import ArgumentError
from .coords import SphericalCoord, ViewportSpec, wrap_lon

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class SamplingPlan:
    """Lista ordenada y determinista de viewports"""

    specs: Tuple[ViewportSpec, ...]
    name: str

    def __post_init__(self):
        specs = tuple(self.specs)
        if not specs:
            raise ArgumentError("sampling plan must contain at least one viewport")
        object.__setattr__(self, 'specs', specs)

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self) -> Iterator[ViewportSpec]:
        return iter(self.specs)

    def __getitem__(self, index: int) -> ViewportSpec:
        return self.specs[index]

    def to_dict(self):
        return {"name": self.name, "viewports": [spec.to_dict() for spec in self.specs]}


def equatorial_plan(m: int = 8, offset_deg: float = 45.0, fov: float = 90.0,
                    size: int = 224, lon0_deg: float = -180.0) -> SamplingPlan:
    """
    M viewports sobre el ecuador separados A grados, empezando en lon0

    Args:
        m: Número de viewports (M)
        offset_deg: Separación en longitud (A)
        fov: Campo de visión horizontal y vertical en grados
        size: Lado del raster cuadrado de cada viewport
        lon0_deg: Longitud del primer viewport

    Returns:
        SamplingPlan con orden k = 0..m-1
    """
    if int(m) != m or m < 1:
        raise ArgumentError(f"m must be a positive integer, got {m}")
    if offset_deg <= 0:
        raise ArgumentError(f"offset_deg must be positive, got {offset_deg}")
    if m * offset_deg > 360.0:
        raise ArgumentError(f"plan spans {m * offset_deg} degrees, more than 360")

    specs = [
        ViewportSpec(
            center=SphericalCoord.from_degrees(0.0, lon0_deg + k * offset_deg),
            fov_x=fov,
            fov_y=fov,
            out_w=size,
            out_h=size,
        )
        for k in range(int(m))
    ]
    return SamplingPlan(tuple(specs), name=f"equatorial_m{int(m)}_a{offset_deg:g}")


def fibonacci_lattice(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Retícula de Fibonacci (puntos medios): z_i = 1 - (2i+1)/n, lon_i = i·ángulo áureo

    Returns:
        (lat, lon) en radianes; lat en (-π/2, π/2), lon en [-π, π)
    """
    if n < 1:
        raise ArgumentError(f"lattice size must be positive, got {n}")
    i = np.arange(n, dtype=np.float64)
    z = 1.0 - (2.0 * i + 1.0) / n
    lat = np.arcsin(z)
    lon = np.mod(i * GOLDEN_ANGLE + math.pi, 2.0 * math.pi) - math.pi
    return lat, lon


def spherical_plan(n: int, fov: float = 90.0, size: int = 224) -> SamplingPlan:
    """Plan de cobertura casi uniforme de la esfera con n centros"""
    if int(n) != n or n < 6:
        raise ArgumentError(f"spherical plan needs n >= 6, got {n}")

    lat, lon = fibonacci_lattice(int(n))
    specs = [
        ViewportSpec(SphericalCoord(float(la), wrap_lon(float(lo))), fov, fov, size, size)
        for la, lo in zip(lat, lon)
    ]
    return SamplingPlan(tuple(specs), name=f"spherical_n{int(n)}")
