"""
Motor de multiplicación matriz-vector sobre el array calibrado.

Una MVM real se descompone en cuatro multiplicaciones no negativas:

    o = W⁺v⁺ + W⁻v⁻ − W⁺v⁻ − W⁻v⁺

El vector se replica en los SLM de todas las filas y la matriz se carga en
los detectores. Cada cuadrante se decodifica con las cuatro lecturas
S(v,w), S(v,0), S(0,w), S(0,0); las lecturas S(v,0) y S(0,w) se comparten
entre los dos cuadrantes del mismo signo y S(0,0) sale de la calibración.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hardware.array_sim import ArrayInstance, build_array
from hardware.calibration import ArrayCalibration, calibrate_array, decode_row, nominal_calibration
from utils.errors import DomainError, StateError

logger = logging.getLogger(__name__)

# Multiplicaciones por lote enviadas de una vez al array
BATCH_CHUNK = 256

# (signo de v, signo de W) y su signo en la recombinación
QUADRANTS = (('+', '+', 1.0), ('+', '-', -1.0), ('-', '+', -1.0), ('-', '-', 1.0))


@dataclass
class MvmResult:
    """
    Resultado de una multiplicación.

    Attributes:
        output: Vector o (N,)
        passes_used: Exposiciones consumidas
        diagnostics: Recortes de curva y unidades de fila usadas
    """
    output: np.ndarray
    passes_used: int
    diagnostics: Dict[str, object] = field(default_factory=dict)


def _check_finite(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} contiene valores no finitos")
    return x


def split_signed(x) -> Tuple[np.ndarray, np.ndarray]:
    """Descompone x = plus − minus con plus, minus ≥ 0 y plus·minus = 0."""
    x = _check_finite(x, 'x')
    return np.maximum(x, 0.0), np.maximum(-x, 0.0)


def _max_abs_scale(x: np.ndarray, axes) -> np.ndarray:
    scale = np.max(np.abs(x), axis=axes, keepdims=True) if x.size else np.ones(())
    return np.where(scale > 0, scale, 1.0)


def normalize(W, v) -> Tuple[np.ndarray, np.ndarray, float, float]:
    """
    Lleva W y v a la caja [−1, 1] dividiendo por su máximo absoluto.

    Returns:
        Tupla (W', v', escala_w, escala_v); la salida final se multiplica
        por escala_w·escala_v. Un operando nulo tiene escala 1.
    """
    W = _check_finite(W, 'W')
    v = _check_finite(v, 'v')
    scale_w = float(_max_abs_scale(W, None).item())
    scale_v = float(_max_abs_scale(v, None).item())
    return W / scale_w, v / scale_v, scale_w, scale_v


def mvm_oracle(W, v) -> np.ndarray:
    """Producto exacto en coma flotante (referencia)."""
    W = _check_finite(W, 'W')
    v = _check_finite(v, 'v')
    if W.ndim != 2 or v.ndim != 1 or W.shape[1] != v.shape[0]:
        raise DomainError(f"Dimensiones incompatibles: W{W.shape} · v{v.shape}")
    return W @ v


class MvmEngine:
    """
    Un array físico con su calibración.

    Las llamadas sobre un mismo motor se serializan; para trabajo en
    paralelo se usan varios motores (ver engine_pool).
    """

    def __init__(self, array: ArrayInstance, calibration: Optional[ArrayCalibration]):
        if calibration is None:
            raise StateError("El motor necesita un array calibrado")
        if calibration.n != array.n:
            raise DomainError(f"Calibración de N={calibration.n} para un array de N={array.n}")
        self.array = array
        self.calibration = calibration
        self.n = array.n
        self._lock = threading.Lock()

    @property
    def naive(self) -> bool:
        return self.calibration.naive

    @property
    def passes_per_mvm(self) -> int:
        return 8 if self.calibration.s00 is not None else 9

    def mvm(self, W, v, rng: Optional[np.random.Generator] = None) -> MvmResult:
        """
        Multiplica W (N×N) por v (N,) en el array.

        Raises:
            DomainError: Dimensiones incompatibles o valores no finitos
        """
        W = _check_finite(W, 'W')
        v = _check_finite(v, 'v')
        if W.shape != (self.n, self.n) or v.shape != (self.n,):
            raise DomainError(f"El motor es {self.n}×{self.n}: W{W.shape}, v{v.shape}")
        clamps_before = self.array.diagnostics.clamp_count
        output = self._run(W[None], v[None], rng=rng)[0]
        return MvmResult(
            output=output,
            passes_used=self.passes_per_mvm,
            diagnostics={
                'clamp_count': self.array.diagnostics.clamp_count - clamps_before,
                'units': self.calibration.units,
            },
        )

    def mvm_batch(self, Ws, vs, item_rngs: Optional[Sequence[np.random.Generator]] = None,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """
        Multiplicaciones independientes W_b·v_b, cada una normalizada por separado.

        Args:
            Ws: Matrices (B, N, N)
            vs: Vectores (B, N)
            item_rngs: Un generador de ruido por multiplicación; con ellos el
                resultado de cada elemento no depende del resto del lote

        Returns:
            Salidas (B, N)
        """
        Ws = _check_finite(Ws, 'W')
        vs = _check_finite(vs, 'v')
        if Ws.ndim != 3 or Ws.shape[1:] != (self.n, self.n) or vs.shape != (Ws.shape[0], self.n):
            raise DomainError(f"Lote incompatible con N={self.n}: W{Ws.shape}, v{vs.shape}")
        if item_rngs is not None and len(item_rngs) != len(vs):
            raise DomainError("Hace falta un generador por multiplicación")
        return self._run(Ws, vs, item_rngs=item_rngs, rng=rng)

    def mvm_columns(self, W, V, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """
        Una matriz por muchas columnas: cada columna de V es una MVM.

        Returns:
            W·V con forma (N, C)
        """
        W = _check_finite(W, 'W')
        V = _check_finite(V, 'V')
        if W.shape != (self.n, self.n) or V.ndim != 2 or V.shape[0] != self.n:
            raise DomainError(f"Tile incompatible con N={self.n}: W{W.shape}, V{V.shape}")
        return self._run(W[None], V.T, rng=rng).T

    def _run(self, Ws: np.ndarray, vs: np.ndarray, item_rngs=None, rng=None) -> np.ndarray:
        count = len(vs)
        out = np.empty((count, self.n))
        with self._lock:
            for start in range(0, count, BATCH_CHUNK):
                stop = min(start + BATCH_CHUNK, count)
                W_part = Ws if len(Ws) == 1 else Ws[start:stop]
                rngs = None if item_rngs is None else item_rngs[start:stop]
                out[start:stop] = self._signed_batch(W_part, vs[start:stop], rngs, rng)
        return out

    def _signed_batch(self, Ws: np.ndarray, vs: np.ndarray, item_rngs, rng) -> np.ndarray:
        """Normaliza, divide en signos, expone las pasadas y recombina."""
        scale_w = _max_abs_scale(Ws, (1, 2))
        scale_v = _max_abs_scale(vs, (1,))
        W_plus, W_minus = split_signed(Ws / scale_w)
        v_plus, v_minus = split_signed(vs / scale_v)

        signed = self._quadrant_products({'+': W_plus, '-': W_minus}, {'+': v_plus, '-': v_minus},
                                         item_rngs, rng)
        return signed * scale_w[:, :, 0] * scale_v

    def _quadrant_products(self, W_parts: Dict[str, np.ndarray], v_parts: Dict[str, np.ndarray],
                           item_rngs, rng) -> np.ndarray:
        cal = self.calibration
        n = self.n
        count = len(v_parts['+'])
        shape = (count, n, n)

        slm_base = np.broadcast_to(cal.slm_baseline.astype(self.array.slm_codes.dtype), shape)
        pd_base = np.broadcast_to(cal.pd_baseline.astype(self.array.pd_codes.dtype), shape)
        slm = {s: cal.encode_slm(np.broadcast_to(v[:, None, :], shape)) for s, v in v_parts.items()}
        pd = {s: np.broadcast_to(cal.encode_pd(W), shape) for s, W in W_parts.items()}

        configs: List[Tuple[np.ndarray, np.ndarray]] = [
            (slm['+'], pd_base), (slm['-'], pd_base),
            (slm_base, pd['+']), (slm_base, pd['-']),
        ]
        configs += [(slm[a], pd[b]) for a, b, _ in QUADRANTS]
        s00 = cal.s00
        if s00 is None:
            configs.append((slm_base, pd_base))

        slm_all = np.concatenate([c[0] for c in configs])
        pd_all = np.concatenate([c[1] for c in configs])
        rngs = None if item_rngs is None else [g for _ in configs for g in item_rngs]
        reads = self.array.expose_batch(slm_all, pd_all, rng=rng, item_rngs=rngs)
        reads = reads.reshape(len(configs), count, n)

        s_v0 = {'+': reads[0], '-': reads[1]}
        s_0w = {'+': reads[2], '-': reads[3]}
        if s00 is None:
            s00 = reads[8]

        active_v = {s: np.any(v > 0, axis=-1)[:, None] for s, v in v_parts.items()}
        active_w = {s: np.any(W > 0, axis=-1) for s, W in W_parts.items()}

        total = np.zeros((count, n))
        for k, (a, b, sign) in enumerate(QUADRANTS):
            decoded = decode_row(reads[4 + k], s_v0[a], s_0w[b], s00, cal)
            # Un cuadrante sin entradas no nulas no contribuye
            mask = active_v[a] & active_w[b]
            total += sign * np.where(mask, decoded, 0.0)
        return total


def mvm(engine: MvmEngine, W, v) -> MvmResult:
    return engine.mvm(W, v)


def _prepare_calibration(array: ArrayInstance, config, calibrated: bool,
                         calibration: Optional[ArrayCalibration]) -> ArrayCalibration:
    if calibration is not None:
        if calibration.full_scale is not None and not array.quantizer.ideal_adc:
            array.set_full_scale(calibration.full_scale)
        return calibration
    if calibrated:
        return calibrate_array(array, config.repeats, config.lut_points)
    return nominal_calibration(config, array.quantizer)


def build_engine(config, calibrated: bool = True, calibration: Optional[ArrayCalibration] = None,
                 seed: Optional[int] = None) -> MvmEngine:
    """
    Construye el array de la configuración y lo calibra.

    Args:
        config: RunConfig
        calibrated: False usa la codificación nominal sin corrección
        calibration: Calibración previa a reutilizar (omite el barrido)
        seed: Semilla del array (por defecto config.seed)
    """
    array = build_array(config, seed)
    cal = _prepare_calibration(array, config, calibrated, calibration)
    return MvmEngine(array, cal)


def engine_pool(config, jobs: int = 1, calibrated: bool = True,
                calibration: Optional[ArrayCalibration] = None,
                seed: Optional[int] = None) -> List[MvmEngine]:
    """
    Motores idénticos (misma semilla de fabricación) que comparten una
    calibración; se calibra una sola vez.
    """
    if jobs < 1:
        raise DomainError(f"jobs debe ser ≥ 1: {jobs}")
    first = build_engine(config, calibrated, calibration, seed)
    engines = [first]
    for _ in range(jobs - 1):
        engines.append(build_engine(config, calibrated, first.calibration, seed))
    logger.debug(f"Pool de {jobs} motores listo")
    return engines
