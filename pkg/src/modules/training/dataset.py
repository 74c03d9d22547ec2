"""
Viewport Dataset
Lectura del manifest, caché de viewports, split con semilla y batches
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Tuple, Union

import numpy as np
import pandas as pd

from src.modules.errors import ConfigError, DegenerateInputError
from src.modules.geometry import SamplingPlan, cut_viewports, load_image
from src.modules.model import N_SITUATIONS

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ['id', 'path', 'mos', 'situation']


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: Path
    mos: float
    situation: int


def read_manifest(path: Union[str, Path]) -> List[ManifestEntry]:
    """
    Leer manifest CSV (id,path,mos,situation); rutas relativas al directorio del manifest
    """
    path = Path(path)
    frame = pd.read_csv(path, dtype={'id': str, 'path': str})
    missing = [c for c in MANIFEST_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"manifest {path} misses columns {missing}")

    bad = ~frame['situation'].isin(range(N_SITUATIONS))
    if bad.any():
        raise ConfigError(f"situation must be in 0..{N_SITUATIONS - 1}: {frame[bad].head(3).to_dict('records')}")

    entries = []
    for row in frame.itertuples(index=False):
        image_path = Path(row.path)
        if not image_path.is_absolute():
            image_path = path.parent / image_path
        entries.append(ManifestEntry(str(row.id), image_path, float(row.mos), int(row.situation)))

    logger.info(f"📋 Manifest loaded: {len(entries)} entries from {path.name}")
    return entries


class ViewportDataset:
    """
    Dataset en memoria: viewports cortados una vez por imagen
    Las imágenes ilegibles se descartan y se cuentan
    """

    def __init__(self, entries: List[ManifestEntry], plan: SamplingPlan, dtype=np.float32):
        self.plan = plan
        views, mos, situations, ids = [], [], [], []
        self.skipped = 0

        for entry in entries:
            try:
                image = load_image(entry.path)
            except Exception as e:
                self.skipped += 1
                logger.warning(f"⚠️ unreadable image skipped: {entry.path} ({e})")
                continue
            views.append(cut_viewports(image, plan, dtype))
            mos.append(entry.mos)
            situations.append(entry.situation)
            ids.append(entry.id)

        if self.skipped:
            logger.warning(f"⚠️ {self.skipped} unreadable images skipped")
        if not views:
            raise DegenerateInputError("no readable images in manifest")

        self.views = np.stack(views)
        self.mos = np.asarray(mos, dtype=np.float64)
        self.situations = np.asarray(situations, dtype=np.int64)
        self.ids = ids
        logger.info(f"✅ Dataset ready: {len(self)} images x {len(plan)} viewports")

    def __len__(self) -> int:
        return len(self.ids)


def split_indices(n: int, train_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Split aleatorio con semilla; cada parte ordenada por índice"""
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(round(n * train_fraction))
    train, val = np.sort(order[:n_train]), np.sort(order[n_train:])
    if train.size == 0 or val.size == 0:
        raise DegenerateInputError(f"empty split: {train.size} train / {val.size} validation of {n}")
    return train, val


def iterate_batches(indices: np.ndarray, batch_size: int, seed: int, epoch: int) -> Iterator[np.ndarray]:
    """
    Batches barajados con semilla seed + epoch; un resto de tamaño 1 se une al último batch
    """
    order = np.random.default_rng(seed + epoch).permutation(indices)
    batches = [order[i:i + batch_size] for i in range(0, order.size, batch_size)]
    if len(batches) > 1 and batches[-1].size < 2:
        last = batches.pop()
        batches[-1] = np.concatenate([batches[-1], last])
    return iter(batches)
