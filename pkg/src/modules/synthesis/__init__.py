"""
Synthesis Package
Dataset sintético por situaciones de distorsión
"""

from .generator import (
    SyntheticDatasetGenerator,
    SyntheticSample,
    synthesize,
    mos_proxy,
    procedural_texture,
    distort,
    region_mask,
    DISTORTIONS,
)

__all__ = [
    'SyntheticDatasetGenerator',
    'SyntheticSample',
    'synthesize',
    'mos_proxy',
    'procedural_texture',
    'distort',
    'region_mask',
    'DISTORTIONS',
]
