"""
Checkpoint binario de parámetros de modelo.

Estructura (big-endian):
    'OMCK' | versión u16 | número de bloques u16
    por bloque: longitud del nombre u16 | nombre UTF-8 | ndim u8 | dims u32… | float64…
    sha256 de todo lo anterior (32 bytes)
"""

import hashlib
import logging
import struct
from pathlib import Path
from typing import Dict

import numpy as np

from .errors import DomainError, FormatError

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b'OMCK'
CHECKPOINT_VERSION = 1
_DIGEST_SIZE = 32


def encode_checkpoint(params: Dict[str, np.ndarray]) -> bytes:
    parts = [CHECKPOINT_MAGIC, struct.pack('>HH', CHECKPOINT_VERSION, len(params))]
    for name in sorted(params):
        values = np.asarray(params[name], dtype=float)
        if not np.all(np.isfinite(values)):
            raise DomainError(f"Parámetro {name} con valores no finitos")
        encoded = name.encode('utf-8')
        parts.append(struct.pack('>H', len(encoded)) + encoded)
        parts.append(struct.pack('>B', values.ndim) + struct.pack(f'>{values.ndim}I', *values.shape))
        parts.append(values.astype('>f8').tobytes())
    body = b''.join(parts)
    return body + hashlib.sha256(body).digest()


def decode_checkpoint(raw: bytes) -> Dict[str, np.ndarray]:
    if raw[:4] != CHECKPOINT_MAGIC:
        raise FormatError("No es un checkpoint OMCK", offset=0)
    if len(raw) < 8 + _DIGEST_SIZE:
        raise FormatError("Checkpoint truncado", offset=len(raw))
    body, digest = raw[:-_DIGEST_SIZE], raw[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise FormatError("Huella del checkpoint no coincide", offset=len(body))
    version, count = struct.unpack('>HH', body[4:8])
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"Versión de checkpoint no soportada: {version}", offset=4)

    params = {}
    pos = 8
    try:
        for _ in range(count):
            name_len, = struct.unpack_from('>H', body, pos)
            pos += 2
            name = body[pos:pos + name_len].decode('utf-8')
            pos += name_len
            ndim, = struct.unpack_from('>B', body, pos)
            pos += 1
            shape = struct.unpack_from(f'>{ndim}I', body, pos)
            pos += 4 * ndim
            size = int(np.prod(shape, dtype=np.int64))
            if pos + 8 * size > len(body):
                raise FormatError(f"Bloque {name} truncado", offset=len(body))
            params[name] = np.frombuffer(body, dtype='>f8', count=size, offset=pos).astype(float).reshape(shape)
            pos += 8 * size
    except (struct.error, UnicodeDecodeError):
        raise FormatError("Cabecera de bloque corrupta", offset=pos)
    if pos != len(body):
        raise FormatError("Bytes sobrantes en el checkpoint", offset=pos)
    return params


def save_checkpoint(path, params: Dict[str, np.ndarray]) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(encode_checkpoint(params))
    logger.info(f"Checkpoint guardado en {out}")
    return out


def load_checkpoint(path) -> Dict[str, np.ndarray]:
    """
    Raises:
        FormatError: Archivo inexistente, versión, huella o bloques no válidos
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise FormatError(f"No existe el checkpoint: {path}")
    return decode_checkpoint(file_path.read_bytes())
