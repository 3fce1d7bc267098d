"""
MLP de dos capas sin activación, con softmax y pérdida NLL a la salida.

Sin no linealidad intermedia los gradientes son expresiones matriciales
exactas: con dZ = (softmax(Z) − Y)/n,

    ∂W2 = dZᵀ·H    ∂b2 = Σ dZ
    dH  = dZ·W2    ∂W1 = dHᵀ·X    ∂b1 = Σ dH
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .adam import AdamState
from .datasets import one_hot
from utils.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

Matmul = Callable[[np.ndarray, np.ndarray], np.ndarray]
PARAM_NAMES = ('W1', 'b1', 'W2', 'b2')


def _dense(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B


def log_softmax(Z: np.ndarray) -> np.ndarray:
    shifted = Z - Z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def nll_loss(logits: np.ndarray, labels: np.ndarray) -> float:
    labels = np.asarray(labels, dtype=np.int64)
    return float(-np.mean(log_softmax(logits)[np.arange(len(labels)), labels]))


@dataclass
class Mlp2:
    """
    Attributes:
        W1: (h, d), b1: (h,)
        W2: (c, h), b2: (c,)
    """
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    history: List[float] = field(default_factory=list)

    @classmethod
    def init(cls, d: int, h: int, c: int, seed: int) -> 'Mlp2':
        """Pesos uniformes en ±1/√fan_in."""
        rng = np.random.default_rng(seed)
        lim1 = 1.0 / np.sqrt(d)
        lim2 = 1.0 / np.sqrt(h)
        return cls(
            W1=rng.uniform(-lim1, lim1, (h, d)),
            b1=rng.uniform(-lim1, lim1, h),
            W2=rng.uniform(-lim2, lim2, (c, h)),
            b2=rng.uniform(-lim2, lim2, c),
        )

    @classmethod
    def from_params(cls, params: Dict[str, np.ndarray]) -> 'Mlp2':
        missing = [name for name in PARAM_NAMES if name not in params]
        if missing:
            raise DomainError(f"Faltan parámetros del MLP: {missing}")
        model = cls(**{name: np.array(params[name], dtype=float) for name in PARAM_NAMES})
        h, d = model.W1.shape
        c = model.W2.shape[0]
        if model.b1.shape != (h,) or model.W2.shape != (c, h) or model.b2.shape != (c,):
            raise DomainError("Formas de parámetros del MLP incoherentes")
        return model

    @property
    def params(self) -> Dict[str, np.ndarray]:
        return {'W1': self.W1, 'b1': self.b1, 'W2': self.W2, 'b2': self.b2}

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.W1.shape[1], self.W1.shape[0], self.W2.shape[0]

    def forward(self, X, matmul: Optional[Matmul] = None) -> np.ndarray:
        """
        Logits (n, c). Con `matmul` cada capa carga sus pesos como matriz y
        las muestras pasan como columnas: Hᵀ = matmul(W1, Xᵀ) + b1.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.W1.shape[1]:
            raise DomainError(f"Entrada {X.shape} incompatible con d={self.W1.shape[1]}")
        matmul = matmul or _dense
        hidden_t = matmul(self.W1, X.T) + self.b1[:, None]
        logits_t = matmul(self.W2, hidden_t) + self.b2[:, None]
        return logits_t.T

    def loss_and_grads(self, X, labels) -> Tuple[float, Dict[str, np.ndarray]]:
        X = np.asarray(X, dtype=float)
        labels = np.asarray(labels, dtype=np.int64)
        c = self.W2.shape[0]
        hidden = X @ self.W1.T + self.b1
        logits = hidden @ self.W2.T + self.b2
        log_probs = log_softmax(logits)
        loss = float(-np.mean(log_probs[np.arange(len(labels)), labels]))

        d_logits = (np.exp(log_probs) - one_hot(labels, c)) / len(labels)
        d_hidden = d_logits @ self.W2
        grads = {
            'W2': d_logits.T @ hidden,
            'b2': d_logits.sum(axis=0),
            'W1': d_hidden.T @ X,
            'b1': d_hidden.sum(axis=0),
        }
        return loss, grads


def train_mlp2(X, labels, model: Mlp2, adam: AdamState, epochs: int, batch: int,
               seed: int = 0) -> Mlp2:
    """
    Entrenamiento por mini-lotes con Adam en aritmética exacta.

    Raises:
        DomainError: Etiquetas fuera de 0..c−1
        NumericError: Si la pérdida deja de ser finita
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    c = model.W2.shape[0]
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise DomainError(f"Etiquetas fuera de 0..{c - 1}")
    if batch < 1:
        raise DomainError(f"batch debe ser ≥ 1: {batch}")

    rng = np.random.default_rng(seed)
    n = len(labels)
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            loss, grads = model.loss_and_grads(X[idx], labels[idx])
            if not np.isfinite(loss):
                raise NumericError(f"Pérdida no finita en la época {epoch}")
            adam.step(model.params, grads)
            total += loss * len(idx)
        model.history.append(total / max(n, 1))
        logger.info(f"MLP época {epoch + 1}/{epochs}: NLL {model.history[-1]:.4f}")
    return model
