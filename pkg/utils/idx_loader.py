"""
Lectura de archivos IDX (formato de MNIST y Fashion-MNIST).

Cabecera big-endian: dos bytes a cero, código de tipo (0x08 = unsigned
byte), número de dimensiones y un entero de 32 bits por dimensión. Los
archivos comprimidos con gzip se leen de forma transparente.
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import FormatError

logger = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
UBYTE_TYPE = 0x08

_GZIP_MAGIC = b'\x1f\x8b'


def _read_bytes(path) -> bytes:
    file_path = Path(path)
    if not file_path.is_file():
        raise FormatError(f"No existe el archivo IDX: {path}")
    raw = file_path.read_bytes()
    if raw[:2] == _GZIP_MAGIC:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise FormatError(f"gzip corrupto en {path}: {e}", offset=0)
    return raw


def parse_idx(raw: bytes) -> Tuple[int, np.ndarray]:
    """
    Decodifica el contenido de un archivo IDX de bytes sin signo.

    Returns:
        Tupla (número mágico, tensor uint8)
    """
    if len(raw) < 4:
        raise FormatError("Cabecera IDX truncada", offset=len(raw))
    magic, = struct.unpack('>I', raw[:4])
    if raw[0] != 0 or raw[1] != 0 or raw[2] != UBYTE_TYPE or raw[3] < 1:
        raise FormatError(f"Número mágico IDX no válido: 0x{magic:08x}", offset=0)

    ndim = raw[3]
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise FormatError("Dimensiones IDX truncadas", offset=len(raw))
    dims = struct.unpack(f'>{ndim}I', raw[4:header_len])

    expected = int(np.prod(dims, dtype=np.int64))
    payload = len(raw) - header_len
    if payload < expected:
        raise FormatError(
            f"Datos IDX truncados: se esperaban {expected} bytes, hay {payload}",
            offset=len(raw),
        )
    if payload > expected:
        logger.warning(f"IDX con {payload - expected} bytes sobrantes tras los datos")
    data = np.frombuffer(raw, dtype=np.uint8, count=expected, offset=header_len)
    return magic, data.reshape(dims)


def load_idx(path, ndim: Optional[int] = None) -> np.ndarray:
    """
    Carga un archivo IDX.

    Los archivos de imágenes (tres dimensiones) se devuelven como float en
    [0, 1]; los de etiquetas (una dimensión) como enteros.

    Args:
        path: Ruta del archivo, comprimido con gzip o no
        ndim: Número de dimensiones exigido (1 etiquetas, 3 imágenes)

    Raises:
        FormatError: Archivo inexistente, número mágico erróneo, dimensión
            distinta de la exigida o datos truncados
    """
    magic, data = parse_idx(_read_bytes(path))
    logger.debug(f"IDX {Path(path).name}: magic 0x{magic:08x}, forma {data.shape}")
    if ndim is not None and data.ndim != ndim:
        raise FormatError(f"{Path(path).name}: IDX de {data.ndim} dimensiones, se esperaban {ndim}",
                          offset=3)
    if magic == IDX_LABELS_MAGIC:
        return data.astype(np.int64)
    return data.astype(float) / 255.0
