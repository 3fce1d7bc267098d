"""
Evaluación de modelos con las multiplicaciones de la inferencia enviadas a la GEMM.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from compute.gemm import gemm
from .datasets import one_hot
from .linear import LinearModel, mse_loss
from .mlp import Mlp2, nll_loss
from utils.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    """
    Attributes:
        predictions: Clase predicha por muestra
        loss: MSE (modelo lineal) o NLL (MLP)
        confusion: (c, c), filas = clase real, columnas = predicha
    """
    predictions: np.ndarray
    loss: float
    confusion: np.ndarray
    outputs: np.ndarray

    @property
    def accuracy(self) -> float:
        total = self.confusion.sum()
        return float(np.trace(self.confusion) / total) if total else 0.0


def confusion_matrix(labels, predictions, classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    matrix = np.zeros((classes, classes), dtype=np.int64)
    np.add.at(matrix, (labels, predictions), 1)
    return matrix


def evaluate_model(model, X, labels, backend) -> Evaluation:
    """
    Pasada hacia delante con la GEMM del backend.

    Args:
        model: LinearModel (pérdida MSE sobre one-hot) o Mlp2 (NLL)
        X: Muestras (n, d)
        labels: Clases en 0..c−1
        backend: OracleBackend o AnalogBackend
    """
    labels = np.asarray(labels, dtype=np.int64)
    X = np.asarray(X, dtype=float)
    if len(X) != len(labels):
        raise DomainError(f"{len(X)} muestras y {len(labels)} etiquetas")

    if not isinstance(model, (LinearModel, Mlp2)):
        raise DomainError(f"Modelo no soportado: {type(model).__name__}")

    outputs = model.forward(X, matmul=lambda A, B: gemm(A, B, backend))
    classes = outputs.shape[1]
    if isinstance(model, LinearModel):
        loss = mse_loss(outputs, one_hot(labels, classes))
    else:
        loss = nll_loss(outputs, labels)

    predictions = np.argmax(outputs, axis=1)
    confusion = confusion_matrix(labels, predictions, classes)
    logger.info(f"Evaluación ({backend.name}): pérdida {loss:.6g}, "
                f"exactitud {np.trace(confusion) / max(len(labels), 1):.2%}")
    return Evaluation(predictions=predictions, loss=loss, confusion=confusion, outputs=outputs)


def write_confusion_csv(confusion: np.ndarray, path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    classes = confusion.shape[0]
    frame = pd.DataFrame(confusion, index=pd.Index(range(classes), name='real'),
                         columns=[f'pred_{c}' for c in range(classes)])
    frame.to_csv(out, lineterminator='\n')
    return out
