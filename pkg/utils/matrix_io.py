"""
Archivos de matrices y vectores.

Texto: cabecera de dos líneas (`filas columnas` y `row-major`) seguida de
las filas con valores separados por comas.
Binario: 'OMMX', filas y columnas como uint32 big-endian y los valores
float64 big-endian en orden de filas.
"""

import io
import logging
import struct
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DomainError, FormatError

logger = logging.getLogger(__name__)

BINARY_MAGIC = b'OMMX'
LAYOUT_TAG = 'row-major'
FLOAT_FORMAT = '%.17g'


def _parse_text(text: str, path) -> np.ndarray:
    lines = text.splitlines()
    if len(lines) < 2:
        raise FormatError(f"Cabecera de matriz incompleta en {path}", offset=len(text.encode('utf-8')))
    try:
        rows, cols = (int(x) for x in lines[0].split())
    except ValueError:
        raise FormatError(f"Dimensiones no válidas en {path}: {lines[0]!r}", offset=0)
    if lines[1].strip() != LAYOUT_TAG:
        raise FormatError(f"Orden de almacenamiento no soportado en {path}: {lines[1]!r}",
                          offset=len(lines[0]) + 1)
    if rows < 1 or cols < 1:
        raise FormatError(f"Dimensiones no positivas en {path}: {rows}×{cols}", offset=0)

    body = '\n'.join(lines[2:])
    try:
        frame = pd.read_csv(io.StringIO(body), header=None, skipinitialspace=True, dtype=float)
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FormatError(f"Datos de matriz ilegibles en {path}: {e}")
    values = frame.to_numpy(dtype=float)
    if values.shape != (rows, cols):
        raise FormatError(f"{path}: la cabecera dice {rows}×{cols} y hay {values.shape[0]}×{values.shape[1]}")
    return values


def _parse_binary(raw: bytes, path) -> np.ndarray:
    if len(raw) < 12:
        raise FormatError(f"Cabecera binaria truncada en {path}", offset=len(raw))
    rows, cols = struct.unpack('>II', raw[4:12])
    expected = rows * cols * 8
    if len(raw) - 12 < expected:
        raise FormatError(f"Datos binarios truncados en {path}", offset=len(raw))
    data = np.frombuffer(raw, dtype='>f8', count=rows * cols, offset=12)
    return data.astype(float).reshape(rows, cols)


def load_matrix(path) -> np.ndarray:
    """
    Carga una matriz en formato texto o binario (detectado por la cabecera).

    Raises:
        FormatError: Archivo inexistente, cabecera o datos mal formados
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise FormatError(f"No existe el archivo de matriz: {path}")
    raw = file_path.read_bytes()
    if raw[:4] == BINARY_MAGIC:
        values = _parse_binary(raw, path)
    else:
        try:
            text = raw.decode('utf-8')
        except UnicodeDecodeError as e:
            raise FormatError(f"{path} no es texto ni binario OMMX", offset=e.start)
        values = _parse_text(text, path)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path} contiene valores no finitos")
    logger.debug(f"Matriz {file_path.name}: {values.shape}")
    return values


def load_vector(path) -> np.ndarray:
    """Carga un vector guardado como matriz de una fila o una columna."""
    values = load_matrix(path)
    if 1 not in values.shape:
        raise FormatError(f"{path} no es un vector: {values.shape}")
    return values.ravel()


def save_matrix(path, values, binary: bool = False) -> Path:
    """Guarda una matriz (o un vector, como columna)."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise DomainError(f"Solo se guardan matrices 2-D: {values.shape}")
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = values.shape
    if binary:
        payload = BINARY_MAGIC + struct.pack('>II', rows, cols) + values.astype('>f8').tobytes()
        out.write_bytes(payload)
    else:
        buffer = io.StringIO()
        buffer.write(f"{rows} {cols}\n{LAYOUT_TAG}\n")
        pd.DataFrame(values).to_csv(buffer, header=False, index=False,
                                    float_format=FLOAT_FORMAT, lineterminator='\n')
        out.write_text(buffer.getvalue(), encoding='utf-8')
    logger.info(f"Matriz {rows}×{cols} guardada en {out}")
    return out
