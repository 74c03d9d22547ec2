"""
Spherical Coordinates
Coordenadas esféricas y especificación de viewports
"""

import math
from dataclasses import dataclass

from src.modules.errors import ArgumentError

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


def wrap_lon(lon: float) -> float:
    """Envolver longitud (radianes) a [-π, π)"""
    wrapped = math.fmod(lon + math.pi, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    wrapped -= math.pi
    if wrapped >= math.pi:
        wrapped -= TWO_PI
    return wrapped


def wrap_lon_deg(lon_deg: float) -> float:
    """Envolver longitud (grados) a [-180, 180)"""
    wrapped = math.fmod(lon_deg + 180.0, 360.0)
    if wrapped < 0.0:
        wrapped += 360.0
    wrapped -= 180.0
    if wrapped >= 180.0:
        wrapped -= 360.0
    return wrapped


@dataclass(frozen=True)
class SphericalCoord:
    """Punto de la esfera: lat en [-π/2, π/2], lon en [-π, π)"""

    lat: float
    lon: float

    def __post_init__(self):
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise ArgumentError(f"non-finite coordinate ({lat}, {lon})")
        if lat < -HALF_PI or lat > HALF_PI:
            raise ArgumentError(f"latitude {lat} outside [-pi/2, pi/2]")
        object.__setattr__(self, 'lat', lat)
        object.__setattr__(self, 'lon', wrap_lon(lon))

    @classmethod
    def from_degrees(cls, lat_deg: float, lon_deg: float) -> "SphericalCoord":
        # el wrap en grados es exacto: 30° y 390° dan el mismo float
        return cls(math.radians(lat_deg), math.radians(wrap_lon_deg(lon_deg)))

    def to_unit_vector(self):
        cos_lat = math.cos(self.lat)
        return (cos_lat * math.cos(self.lon), cos_lat * math.sin(self.lon), math.sin(self.lat))

    def as_degrees(self):
        return math.degrees(self.lat), math.degrees(self.lon)


@dataclass(frozen=True)
class ViewportSpec:
    """
    Viewport rectilíneo (gnomónico) centrado en un punto de la esfera
    fov en grados dentro de (0, 180); raster de salida out_w x out_h
    """

    center: SphericalCoord
    fov_x: float = 90.0
    fov_y: float = 90.0
    out_w: int = 224
    out_h: int = 224

    def __post_init__(self):
        for name in ('fov_x', 'fov_y'):
            fov = float(getattr(self, name))
            if not (0.0 < fov < 180.0):
                raise ArgumentError(f"{name} must lie in (0, 180) degrees, got {fov}")
            object.__setattr__(self, name, fov)
        for name in ('out_w', 'out_h'):
            size = getattr(self, name)
            if int(size) != size or size < 2:
                raise ArgumentError(f"{name} must be an integer >= 2, got {size}")
            object.__setattr__(self, name, int(size))

    @property
    def half_extent(self):
        """tan(fov/2) en cada eje del plano tangente"""
        return math.tan(math.radians(self.fov_x) / 2.0), math.tan(math.radians(self.fov_y) / 2.0)

    def to_dict(self):
        lat_deg, lon_deg = self.center.as_degrees()
        return {
            "lat_deg": lat_deg,
            "lon_deg": lon_deg,
            "fov_x": self.fov_x,
            "fov_y": self.fov_y,
            "out_w": self.out_w,
            "out_h": self.out_h,
        }
