"""
SVD de Jacobi de un lado y reconstrucción top-K de imágenes a través de la GEMM.
"""

import logging
from dataclasses import dataclass

import numpy as np

from compute.gemm import gemm
from utils.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-10
MAX_SWEEPS = 100


@dataclass
class SvdFactors:
    """
    A = U·diag(S)·Vᵀ con p = min(m, n).

    Attributes:
        U: (m, p) columnas ortonormales
        S: (p,) valores singulares no crecientes
        V: (n, p) columnas ortonormales
    """
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.S)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.S) @ self.V.T


def _complete_basis(U: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Sustituye las columnas no válidas por vectores ortonormales al resto (Gram-Schmidt)."""
    m = U.shape[0]
    basis = [U[:, j] for j in range(U.shape[1]) if valid[j]]
    candidates = iter(np.eye(m))
    for j in range(U.shape[1]):
        if valid[j]:
            continue
        for e in candidates:
            w = e.copy()
            for _ in range(2):
                for b in basis:
                    w -= (b @ w) * b
            norm = np.linalg.norm(w)
            if norm > 1e-8:
                U[:, j] = w / norm
                basis.append(U[:, j])
                break
    return U


def _one_sided_jacobi(A: np.ndarray):
    m, n = A.shape
    U = A.copy()
    V = np.eye(n)
    # Columnas a nivel de redondeo se tratan como nulas
    negligible = float(np.sum(A * A)) * (max(m, n) * np.finfo(float).eps) ** 2
    for sweep_index in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = U[:, p] @ U[:, p]
                beta = U[:, q] @ U[:, q]
                gamma = U[:, p] @ U[:, q]
                if min(alpha, beta) <= negligible or abs(gamma) <= JACOBI_TOLERANCE * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                up, uq = U[:, p].copy(), U[:, q].copy()
                U[:, p] = c * up - s * uq
                U[:, q] = s * up + c * uq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        if not rotated:
            logger.debug(f"Jacobi convergido en {sweep_index + 1} barridos")
            return U, V
    raise NumericError(f"Jacobi sin convergencia tras {MAX_SWEEPS} barridos")


def jacobi_svd(A) -> SvdFactors:
    """
    Descomposición en valores singulares por rotaciones de Jacobi de un lado.

    Converge cuando todos los productos escalares entre columnas distintas
    quedan por debajo de 1e-10 relativo a sus normas.

    Raises:
        DomainError: Matriz vacía o no finita
        NumericError: Sin convergencia tras 100 barridos
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0 or not np.all(np.isfinite(A)):
        raise DomainError(f"jacobi_svd necesita una matriz finita no vacía: {A.shape}")
    if A.shape[0] < A.shape[1]:
        f = jacobi_svd(A.T)
        return SvdFactors(U=f.V, S=f.S, V=f.U)

    work, V = _one_sided_jacobi(A)
    S = np.linalg.norm(work, axis=0)
    order = np.argsort(-S, kind='stable')
    S = S[order]
    work = work[:, order]
    V = V[:, order]

    floor = S[0] * max(A.shape) * np.finfo(float).eps
    valid = S > floor
    U = np.zeros_like(work)
    U[:, valid] = work[:, valid] / S[valid]
    S = np.where(valid, S, 0.0)
    if not np.all(valid):
        U = _complete_basis(U, valid)
    return SvdFactors(U=U, S=S, V=V)


def reconstruct_topk(factors: SvdFactors, K: int, backend) -> np.ndarray:
    """U_K·diag(S_K)·V_Kᵀ calculado con la GEMM del backend."""
    if not 1 <= K <= factors.rank:
        raise DomainError(f"K debe estar en [1, {factors.rank}]: {K}")
    left = factors.U[:, :K] * factors.S[:K]
    return gemm(left, factors.V[:, :K].T, backend)


def reconstruct_image(image, K: int, backend) -> np.ndarray:
    """
    Reconstrucción top-K de una imagen en [0, 1]; los canales de color se
    descomponen y reconstruyen por separado.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim == 2:
        return reconstruct_topk(jacobi_svd(image), K, backend)
    if image.ndim == 3:
        channels = [reconstruct_topk(jacobi_svd(image[:, :, c]), K, backend)
                    for c in range(image.shape[2])]
        return np.stack(channels, axis=-1)
    raise DomainError(f"Forma de imagen no soportada: {image.shape}")


def psnr(reference, test, peak: float = 1.0) -> float:
    """Relación señal/ruido de pico en dB (inf si son idénticas)."""
    reference = np.asarray(reference, dtype=float)
    test = np.asarray(test, dtype=float)
    if reference.shape != test.shape:
        raise DomainError(f"Formas distintas: {reference.shape} y {test.shape}")
    mse = float(np.mean((reference - test) ** 2))
    if mse == 0.0:
        return float('inf')
    return 10.0 * np.log10(peak * peak / mse)


def frobenius_tail(factors: SvdFactors, K: int) -> float:
    """Error de Eckart-Young √(Σ_{i>K} S_i²)."""
    return float(np.sqrt(np.sum(factors.S[K:] ** 2)))
