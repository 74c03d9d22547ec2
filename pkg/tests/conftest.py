"""Shared fixtures for the IQCaption360 test suite."""

import math

import numpy as np
import pytest

from src.modules.geometry import ErpImage


def smooth_pixels(height: int, width: int, channels: int = 3) -> np.ndarray:
    """Seam-continuous test image built from the unit vector of each pixel centre."""
    lat = math.pi / 2 - (np.arange(height) + 0.5) * math.pi / height
    lon = (np.arange(width) + 0.5) * 2 * math.pi / width - math.pi
    lat, lon = np.meshgrid(lat, lon, indexing='ij')
    x, y, z = np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)
    planes = [0.5 + 0.3 * x + 0.1 * z, 0.5 + 0.3 * y - 0.1 * x, 0.5 + 0.2 * z + 0.1 * y]
    return np.stack(planes[:channels], axis=-1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def smooth_erp():
    return ErpImage(smooth_pixels(64, 128))


@pytest.fixture
def random_pair(rng):
    ref = rng.uniform(0.1, 0.9, size=(32, 64, 3))
    dist = np.clip(ref + rng.normal(scale=0.05, size=ref.shape), 0.0, 1.0)
    return ErpImage(ref), ErpImage(dist)
