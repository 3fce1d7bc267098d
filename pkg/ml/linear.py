"""
Clasificador lineal por mínimos cuadrados (pérdida MSE) entrenado con Adam.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .adam import AdamState
from utils.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

Matmul = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _dense(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B


@dataclass
class LinearModel:
    """
    y = X·W + b.

    Attributes:
        W: (d, c)
        b: (c,)
        history: Pérdida MSE por época
    """
    W: np.ndarray
    b: np.ndarray
    history: List[float] = field(default_factory=list)

    @classmethod
    def zeros(cls, features: int, outputs: int) -> 'LinearModel':
        return cls(W=np.zeros((features, outputs)), b=np.zeros(outputs))

    @property
    def params(self) -> Dict[str, np.ndarray]:
        return {'W': self.W, 'b': self.b}

    def forward(self, X, matmul: Optional[Matmul] = None) -> np.ndarray:
        """
        Salidas (n, c). Con `matmul` los pesos se cargan como matriz y las
        muestras pasan como columnas: Yᵀ = matmul(Wᵀ, Xᵀ) + b.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.W.shape[0]:
            raise DomainError(f"Entrada {X.shape} incompatible con {self.W.shape[0]} características")
        matmul = matmul or _dense
        return (matmul(self.W.T, X.T) + self.b[:, None]).T


def mse_loss(outputs: np.ndarray, targets: np.ndarray) -> float:
    return float(np.mean((outputs - targets) ** 2))


def train_linear_mse(X, targets, adam: AdamState, epochs: int,
                     model: Optional[LinearModel] = None) -> LinearModel:
    """
    Entrenamiento de lote completo con Adam sobre la pérdida MSE.

    Args:
        X: Muestras (n, d)
        targets: Objetivos (n, c), one-hot o ±1
        adam: Estado del optimizador
        epochs: Pasos de Adam
        model: Modelo inicial (por defecto, todo ceros)

    Raises:
        NumericError: Si la pérdida deja de ser finita
    """
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    if X.ndim != 2 or len(X) != len(targets):
        raise DomainError(f"Formas incompatibles: X{X.shape}, objetivos{targets.shape}")
    model = model or LinearModel.zeros(X.shape[1], targets.shape[1])
    scale = 2.0 / targets.size

    for epoch in range(epochs):
        residual = X @ model.W + model.b - targets
        loss = float(np.mean(residual ** 2))
        if not np.isfinite(loss):
            raise NumericError(f"Pérdida no finita en la época {epoch}")
        model.history.append(loss)
        grads = {'W': scale * (X.T @ residual), 'b': scale * residual.sum(axis=0)}
        adam.step(model.params, grads)

    final = mse_loss(X @ model.W + model.b, targets)
    if not np.isfinite(final):
        raise NumericError("Pérdida final no finita")
    model.history.append(final)
    logger.info(f"Modelo lineal: {epochs} épocas, MSE final {final:.6g}")
    return model


def least_squares_loss(X, targets) -> float:
    """Pérdida MSE del óptimo cerrado (ecuaciones normales, con término independiente)."""
    X = np.asarray(X, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    design = np.hstack([X, np.ones((len(X), 1))])
    coeffs, *_ = np.linalg.lstsq(design, targets, rcond=None)
    return mse_loss(design @ coeffs, targets)


def standardize(X) -> np.ndarray:
    """Centra y escala cada característica a varianza unidad."""
    X = np.asarray(X, dtype=float)
    std = X.std(axis=0)
    return (X - X.mean(axis=0)) / np.where(std > 0, std, 1.0)
