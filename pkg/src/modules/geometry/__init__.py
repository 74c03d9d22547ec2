"""
Geometry Package
Geometría esfera / equirectangular y extracción de viewports gnomónicos
"""

from .erp import ErpImage, load_image, save_image, read_erpf, write_erpf
from .coords import SphericalCoord, ViewportSpec, wrap_lon
from .projection import (
    erp_to_sphere,
    gnomonic_backproject,
    gnomonic_project,
    backproject_grid,
    sample_sphere,
    extract_viewport,
    cut_viewports,
)
from .sampling import SamplingPlan, equatorial_plan, spherical_plan, fibonacci_lattice

__all__ = [
    'ErpImage',
    'load_image',
    'save_image',
    'read_erpf',
    'write_erpf',
    'SphericalCoord',
    'wrap_lon',
    'erp_to_sphere',
    'gnomonic_backproject',
    'gnomonic_project',
    'backproject_grid',
    'sample_sphere',
    'extract_viewport',
    'cut_viewports',
    'ViewportSpec',
    'SamplingPlan',
    'equatorial_plan',
    'spherical_plan',
    'fibonacci_lattice',
]
