"""
Imágenes PGM (P2/P5, gris) y PPM (P3/P6, color) con maxval ≤ 255.
"""

import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .errors import DomainError, FormatError

logger = logging.getLogger(__name__)

_CHANNELS = {b'P2': 1, b'P5': 1, b'P3': 3, b'P6': 3}
_BINARY = {b'P5', b'P6'}


def _header_tokens(raw: bytes, count: int) -> Tuple[List[bytes], int]:
    """Lee `count` tokens de cabecera saltando comentarios; devuelve la posición final."""
    tokens = []
    pos = 0
    size = len(raw)
    while len(tokens) < count:
        while pos < size and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < size and raw[pos:pos + 1] == b'#':
            while pos < size and raw[pos:pos + 1] not in (b'\n', b'\r'):
                pos += 1
            continue
        if pos >= size:
            raise FormatError("Cabecera de imagen incompleta", offset=pos)
        start = pos
        while pos < size and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b'#':
            pos += 1
        tokens.append(raw[start:pos])
    return tokens, pos


def _parse_int(token: bytes, offset: int, name: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise FormatError(f"{name} no numérico: {token!r}", offset=offset)
    if value < 1:
        raise FormatError(f"{name} debe ser ≥ 1: {value}", offset=offset)
    return value


def decode_netpbm(raw: bytes) -> np.ndarray:
    """Decodifica P2/P3/P5/P6 a uint8 (H, W) o (H, W, 3)."""
    magic = raw[:2]
    if magic not in _CHANNELS:
        raise FormatError(f"Formato de imagen no soportado: {magic!r}", offset=0)
    tokens, pos = _header_tokens(raw, 4)
    width = _parse_int(tokens[1], pos, 'ancho')
    height = _parse_int(tokens[2], pos, 'alto')
    maxval = _parse_int(tokens[3], pos, 'maxval')
    if maxval > 255:
        raise FormatError(f"maxval {maxval} > 255 no soportado", offset=pos)

    channels = _CHANNELS[magic]
    expected = width * height * channels
    if magic in _BINARY:
        # Un único carácter de espacio separa la cabecera de los datos
        start = pos + 1
        body = raw[start:start + expected]
        if len(body) < expected:
            raise FormatError(f"Datos de imagen truncados: {len(body)} de {expected} bytes",
                              offset=start + len(body))
        values = np.frombuffer(body, dtype=np.uint8).astype(np.int64)
    else:
        try:
            values = np.array([int(t) for t in raw[pos:].split()], dtype=np.int64)
        except ValueError:
            raise FormatError("Valor de píxel no numérico en imagen ASCII", offset=pos)
        if values.size < expected:
            raise FormatError(f"Imagen ASCII truncada: {values.size} de {expected} valores",
                              offset=len(raw))
        values = values[:expected]
    if np.any(values > maxval):
        raise FormatError(f"Píxel por encima de maxval {maxval}", offset=pos)

    shape = (height, width) if channels == 1 else (height, width, 3)
    return values.astype(np.uint8).reshape(shape)


def load_image(path) -> np.ndarray:
    """
    Carga una imagen PGM o PPM.

    Raises:
        FormatError: Archivo inexistente o cabecera/datos mal formados
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise FormatError(f"No existe la imagen: {path}")
    image = decode_netpbm(file_path.read_bytes())
    logger.debug(f"Imagen {file_path.name}: {image.shape}")
    return image


def load_pgm(path) -> np.ndarray:
    image = load_image(path)
    if image.ndim != 2:
        raise FormatError(f"{path} no es una imagen en escala de grises", offset=0)
    return image


def _as_pixels(image) -> np.ndarray:
    pixels = np.asarray(image)
    if pixels.dtype == np.uint8:
        return pixels
    pixels = pixels.astype(float)
    if not np.all(np.isfinite(pixels)) or np.any(pixels < 0) or np.any(pixels > 255):
        raise DomainError("Los píxeles deben estar en [0, 255]")
    return np.rint(pixels).astype(np.uint8)


def encode_netpbm(image, binary: bool = True) -> bytes:
    pixels = _as_pixels(image)
    if pixels.ndim == 2:
        magic = b'P5' if binary else b'P2'
    elif pixels.ndim == 3 and pixels.shape[2] == 3:
        magic = b'P6' if binary else b'P3'
    else:
        raise DomainError(f"Forma de imagen no soportada: {pixels.shape}")
    height, width = pixels.shape[:2]
    header = magic + f"\n{width} {height}\n255\n".encode('ascii')
    if binary:
        return header + np.ascontiguousarray(pixels).tobytes()
    rows = pixels.reshape(height, -1)
    body = '\n'.join(' '.join(str(int(v)) for v in row) for row in rows)
    return header + body.encode('ascii') + b'\n'


def save_image(path, image, binary: bool = True) -> Path:
    """Guarda (H, W) como PGM o (H, W, 3) como PPM."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(encode_netpbm(image, binary))
    logger.info(f"Imagen guardada en {out}")
    return out


def save_pgm(path, image, binary: bool = True) -> Path:
    if np.ndim(image) != 2:
        raise DomainError("save_pgm espera una imagen (H, W)")
    return save_image(path, image, binary)


def to_unit(image) -> np.ndarray:
    """Píxeles uint8 a float en [0, 1]."""
    return np.asarray(image, dtype=float) / 255.0


def from_unit(values) -> np.ndarray:
    """Float en [0, 1] a uint8 (recortando)."""
    return np.rint(np.clip(np.asarray(values, dtype=float), 0.0, 1.0) * 255.0).astype(np.uint8)


def synthetic_test_image(size: int = 64, seed: int = 0) -> np.ndarray:
    """
    Imagen de prueba determinista en gris: gradiente, un disco y una banda
    con un poco de textura aleatoria.
    """
    if size < 4:
        raise DomainError(f"Tamaño de imagen demasiado pequeño: {size}")
    y, x = np.mgrid[0:size, 0:size] / (size - 1)
    image = 0.2 + 0.4 * x
    disc = (x - 0.35) ** 2 + (y - 0.4) ** 2 < 0.05
    image = np.where(disc, 0.9, image)
    band = (y > 0.7) & (y < 0.8)
    image = np.where(band, 0.1 + 0.3 * np.sin(8 * np.pi * x) ** 2, image)
    rng = np.random.default_rng(seed)
    image = image + 0.03 * rng.standard_normal(image.shape)
    return from_unit(image)
