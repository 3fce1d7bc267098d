"""
Conjuntos de datos: clusters gaussianos sintéticos y MNIST/Fashion-MNIST en IDX.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from utils.errors import DomainError, FormatError
from utils.idx_loader import load_idx

logger = logging.getLogger(__name__)

# Los centros se sortean en esta caja, como en los generadores habituales
CENTER_BOX = (-10.0, 10.0)

# Nombres de archivo de MNIST y Fashion-MNIST (se aceptan también con .gz)
IDX_FILES = {
    'train': ('train-images-idx3-ubyte', 'train-labels-idx1-ubyte'),
    'test': ('t10k-images-idx3-ubyte', 't10k-labels-idx1-ubyte'),
}
DATASETS = ('mnist', 'fashion')


def blob_centers(k: int, seed: int, dim: int = 2) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    return rng.uniform(CENTER_BOX[0], CENTER_BOX[1], (k, dim))


def make_blobs(k: int, n_per: int, spread: float, seed: int,
               dim: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """
    k clusters gaussianos isótropos con centros sorteados con la semilla.

    Returns:
        Tupla (X de forma (k·n_per, dim), etiquetas en 0..k−1)
    """
    if k < 2:
        raise DomainError(f"Hacen falta al menos 2 clusters: {k}")
    if spread < 0:
        raise DomainError(f"La dispersión debe ser ≥ 0: {spread}")
    if n_per < 1:
        raise DomainError(f"n_per debe ser ≥ 1: {n_per}")
    centers = blob_centers(k, seed, dim)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    labels = np.repeat(np.arange(k), n_per)
    X = centers[labels] + spread * rng.standard_normal((k * n_per, dim))
    return X, labels


def one_hot(labels, classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise DomainError(f"Etiquetas fuera de 0..{classes - 1}")
    out = np.zeros((labels.size, classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


@dataclass
class DatasetSplit:
    """Imágenes aplanadas en [0, 1] y etiquetas."""
    X: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)


def _find(directory: Path, stem: str) -> Path:
    for candidate in (directory / stem, directory / f"{stem}.gz"):
        if candidate.is_file():
            return candidate
    raise FormatError(f"No se encuentra {stem}[.gz] en {directory}")


def load_split(directory, split: str, limit: Optional[int] = None) -> DatasetSplit:
    """
    Carga la partición 'train' o 'test' de un directorio con archivos IDX.

    Los mismos nombres de archivo sirven para MNIST y Fashion-MNIST.
    """
    if split not in IDX_FILES:
        raise DomainError(f"Partición desconocida: {split}")
    directory = Path(directory)
    images_name, labels_name = IDX_FILES[split]
    images = load_idx(_find(directory, images_name), ndim=3)
    labels = load_idx(_find(directory, labels_name), ndim=1)
    if len(images) != len(labels):
        raise FormatError(f"{len(images)} imágenes y {len(labels)} etiquetas en {directory}")
    if limit is not None:
        images = images[:limit]
        labels = labels[:limit]
    logger.info(f"{split}: {len(labels)} muestras de {directory}")
    return DatasetSplit(X=images.reshape(len(images), -1), labels=labels)
