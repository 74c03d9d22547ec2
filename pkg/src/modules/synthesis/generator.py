"""
Synthetic Dataset Generator
Genera un dataset ERP de escritorio con distorsiones por regiones y MOS proxy
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
import pandas as pd
from scipy import ndimage

from src.modules.errors import ArgumentError
from src.modules.geometry import ErpImage, save_image

logger = logging.getLogger(__name__)

DISTORTIONS = ('blur', 'noise', 'block')
LEVELS = (1, 2, 3)
BAND_DEG = 90.0
MOS_MAX = 3.0
LEVEL_SLOPE = 0.15
AREA_SLOPE = 1.5
BLUR_SIGMA = 1.5
NOISE_STD = 0.05


def mos_proxy(level: int, area: float) -> float:
    """
    MOS proxy = 3 − 0.15·nivel − 1.5·área; sin distorsión vale 3
    El área domina: los rangos de MOS de las situaciones 1, 2 y 3 no se solapan
    """
    if level == 0 or area == 0.0:
        return MOS_MAX
    return MOS_MAX - LEVEL_SLOPE * level - AREA_SLOPE * area


def procedural_texture(rng: np.random.Generator, height: int, width: int, terms: int = 8) -> np.ndarray:
    """
    Textura de detalle fino, continua en la costura: suma de sinusoides sobre el vector unitario
    Longitudes de onda entre 7.5° y 15°, de modo que blur y bloques borran detalle visible
    """
    lat = np.pi / 2 - (np.arange(height) + 0.5) * np.pi / height
    lon = (np.arange(width) + 0.5) * 2 * np.pi / width - np.pi
    lat, lon = np.meshgrid(lat, lon, indexing='ij')
    points = np.stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)], axis=-1)

    image = np.empty((height, width, 3))
    for c in range(3):
        directions = rng.normal(size=(terms, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        freqs = rng.uniform(24.0, 48.0, size=terms)
        phases = rng.uniform(0, 2 * np.pi, size=terms)
        amps = rng.uniform(0.3, 1.0, size=terms)
        wave = np.sin((points @ directions.T) * freqs + phases) @ amps
        image[..., c] = 0.5 + 0.3 * wave / np.sqrt(np.sum(amps * amps))
    return np.clip(image, 0.0, 1.0)


def distort(pixels: np.ndarray, kind: str, level: int, rng: np.random.Generator) -> np.ndarray:
    """Aplicar una distorsión (blur / noise / block) de nivel 1..3 a toda la imagen"""
    if level not in LEVELS:
        raise ArgumentError(f"distortion level must be in {LEVELS}, got {level}")
    if kind == 'blur':
        out = ndimage.gaussian_filter(pixels, sigma=(BLUR_SIGMA * level, BLUR_SIGMA * level, 0), mode=('nearest', 'wrap', 'nearest'))
    elif kind == 'noise':
        out = pixels + rng.normal(scale=NOISE_STD * level, size=pixels.shape)
    elif kind == 'block':
        size = 2 ** (level + 1)
        h, w, c = pixels.shape
        padded = np.pad(pixels, ((0, -h % size), (0, -w % size), (0, 0)), mode='edge')
        ph, pw = padded.shape[:2]
        blocks = padded.reshape(ph // size, size, pw // size, size, c).mean(axis=(1, 3))
        out = np.repeat(np.repeat(blocks, size, axis=0), size, axis=1)[:h, :w]
    else:
        raise ArgumentError(f"unknown distortion {kind!r}, expected one of {DISTORTIONS}")
    return np.clip(out, 0.0, 1.0)


def region_mask(situation: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """
    Máscara de columnas distorsionadas: 0 ninguna, 1 una banda de 90°,
    2 dos bandas separadas entre 90° y 270°, 3 global
    """
    mask = np.zeros(width, dtype=bool)
    if situation == 0:
        return mask
    if situation == 3:
        mask[:] = True
        return mask

    band = int(round(width * BAND_DEG / 360.0))
    starts = [int(rng.integers(0, width))]
    if situation == 2:
        offset_deg = rng.uniform(BAND_DEG, 360.0 - BAND_DEG)
        starts.append(starts[0] + int(round(width * offset_deg / 360.0)))
    for start in starts:
        mask[np.arange(start, start + band) % width] = True
    return mask


@dataclass
class SyntheticSample:
    id: str
    path: str
    mos: float
    situation: int
    distortion: str
    level: int
    area: float

    def to_row(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'path': self.path,
            'mos': round(self.mos, 6),
            'situation': self.situation,
            'distortion': self.distortion,
            'level': self.level,
            'area': round(self.area, 6),
        }


class SyntheticDatasetGenerator:
    """
    Generador estratificado por situación: exactamente n/4 imágenes por situación
    """

    def __init__(self, width: int = 256, height: int = 128, seed: int = 0):
        if width < 8 or height < 4:
            raise ArgumentError(f"synthetic ERP too small: {width}x{height}")
        self.width = width
        self.height = height
        self.seed = seed
        self.stats = {'generated': 0, 'per_situation': [0, 0, 0, 0]}

    def sample(self, index: int, situation: int) -> Tuple[ErpImage, SyntheticSample]:
        """Una imagen con su fila de manifest; determinista en (seed, index)"""
        rng = np.random.default_rng([self.seed, index])
        pixels = procedural_texture(rng, self.height, self.width)
        mask = region_mask(situation, self.width, rng)
        kind, level = 'none', 0
        if situation > 0:
            kind = DISTORTIONS[int(rng.integers(len(DISTORTIONS)))]
            level = int(rng.choice(LEVELS))
            pixels = np.where(mask[None, :, None], distort(pixels, kind, level, rng), pixels)

        area = float(mask.mean())
        image_id = f"syn_{index:05d}"
        record = SyntheticSample(image_id, f"images/{image_id}.png", mos_proxy(level, area), situation, kind, level, area)
        return ErpImage(pixels), record

    def generate(self, out_dir: Union[str, Path], n: int) -> Dict[str, Any]:
        """
        Escribir n imágenes PNG y manifest.csv en out_dir

        Returns:
            Dict con success, ruta del manifest y conteos
        """
        if n < 4 or n % 4:
            raise ArgumentError(f"n must be a positive multiple of 4, got {n}")
        out_dir = Path(out_dir)
        (out_dir / "images").mkdir(parents=True, exist_ok=True)

        logger.info(f"🔄 Generating {n} synthetic ERP images ({self.width}x{self.height}, seed {self.seed})")
        records: List[SyntheticSample] = []
        for index in range(n):
            situation = index % 4
            image, record = self.sample(index, situation)
            save_image(image, out_dir / record.path)
            records.append(record)
            self.stats['generated'] += 1
            self.stats['per_situation'][situation] += 1

        manifest = out_dir / "manifest.csv"
        pd.DataFrame([r.to_row() for r in records]).to_csv(manifest, index=False)
        logger.info(f"✅ Synthetic dataset written: {manifest}")
        return {
            "success": True,
            "manifest": str(manifest),
            "n": n,
            "seed": self.seed,
            "per_situation": list(self.stats['per_situation']),
        }

    def get_stats(self) -> Dict[str, Any]:
        return dict(self.stats, width=self.width, height=self.height, seed=self.seed)


def synthesize(out_dir: Union[str, Path], n: int = 200, seed: int = 0,
               width: int = 256, height: int = 128) -> Dict[str, Any]:
    return SyntheticDatasetGenerator(width, height, seed).generate(out_dir, n)
