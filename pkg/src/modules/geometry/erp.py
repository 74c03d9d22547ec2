"""
ERP Raster Images
Contenedor de imágenes equirectangulares y E/S (Pillow + formato raw ERPF)
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from src.modules.errors import ArgumentError, ConfigError

logger = logging.getLogger(__name__)

ERPF_MAGIC = b"ERPF"
SUPPORTED_EXTENSIONS = {'.png', '.jpg', '.jpeg', '.bmp', '.tiff'}


@dataclass(frozen=True)
class ErpImage:
    """
    Raster equirectangular (o viewport) con valores en [0, 1]
    Los píxeles se guardan como array (height, width, channels) en orden row-major
    """

    pixels: np.ndarray
    kind: str = "erp"

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim == 2:
            pixels = pixels[:, :, None]
        if pixels.ndim != 3:
            raise ArgumentError(f"pixels must be (h, w[, c]), got shape {pixels.shape}")

        height, width, channels = pixels.shape
        if width < 2 or height < 2:
            raise ArgumentError(f"image must be at least 2x2, got {width}x{height}")
        if channels not in (1, 3):
            raise ArgumentError(f"channels must be 1 or 3, got {channels}")
        if not np.all(np.isfinite(pixels)):
            raise ArgumentError("pixels contain NaN or Inf")
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ArgumentError(f"pixel values outside [0, 1]: [{pixels.min():.4f}, {pixels.max():.4f}]")

        object.__setattr__(self, 'pixels', pixels)

        if self.kind == "erp" and width != 2 * height:
            logger.warning(f"⚠️ ERP aspect is not 2:1 ({width}x{height})")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def same_geometry(self, other: "ErpImage") -> bool:
        return self.pixels.shape == other.pixels.shape


def load_image(path: Union[str, Path]) -> ErpImage:
    """
    Leer una imagen PNG/JPEG (o ERPF) como ErpImage

    Args:
        path: Ruta del archivo

    Returns:
        ErpImage con valores normalizados a [0, 1]
    """
    path = Path(path)
    if path.suffix.lower() == '.erpf':
        return read_erpf(path)
    if path.suffix.lower() not in SUPPORTED_EXTENSIONS:
        raise ArgumentError(f"unsupported image format: {path.suffix}")

    with Image.open(path) as img:
        mode = 'L' if img.mode in ('L', 'I', 'I;16', '1') else 'RGB'
        data = np.asarray(img.convert(mode), dtype=np.float64) / 255.0

    return ErpImage(data)


def save_image(image: ErpImage, path: Union[str, Path]) -> Path:
    """Guardar como PNG de 8 bits (ERPF si la extensión es .erpf)"""
    path = Path(path)
    if path.suffix.lower() == '.erpf':
        return write_erpf(image, path)

    data = np.clip(np.rint(image.pixels * 255.0), 0, 255).astype(np.uint8)
    if image.channels == 1:
        data = data[:, :, 0]
    tmp = path.with_name(path.name + '.tmp')
    Image.fromarray(data).save(tmp, format='PNG')
    tmp.replace(path)
    return path


def write_erpf(image: ErpImage, path: Union[str, Path]) -> Path:
    """
    Escribir formato raw ERPF: magic, u32 width/height/channels (LE), f32 row-major
    """
    path = Path(path)
    header = np.array([image.width, image.height, image.channels], dtype='<u4').tobytes()
    body = image.pixels.astype('<f4').tobytes()

    tmp = path.with_name(path.name + '.tmp')
    with open(tmp, 'wb') as f:
        f.write(ERPF_MAGIC + header + body)
    tmp.replace(path)
    return path


def read_erpf(path: Union[str, Path], kind: str = "erp") -> ErpImage:
    """Leer formato raw ERPF"""
    raw = Path(path).read_bytes()
    if raw[:4] != ERPF_MAGIC:
        raise ConfigError(f"bad ERPF magic in {path}: {raw[:4]!r}")

    if len(raw) < 16:
        raise ConfigError(f"truncated ERPF header in {path}: {len(raw)} bytes")
    width, height, channels = (int(v) for v in np.frombuffer(raw[4:16], dtype='<u4'))
    expected = width * height * channels
    if (len(raw) - 16) % 4:
        raise ConfigError(f"ERPF payload in {path} is not a whole number of float32 samples")
    samples = np.frombuffer(raw[16:], dtype='<f4')
    if samples.size != expected or expected == 0:
        raise ConfigError(f"ERPF payload has {samples.size} samples, expected {expected}")

    return ErpImage(samples.astype(np.float64).reshape(height, width, channels), kind=kind)
