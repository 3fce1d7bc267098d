"""
Modelo de dispositivo: curvas de respuesta de SLM y fotodetectores,
variación de fabricación, cuantizadores DAC/ADC y ruido de lectura.

El código de puerta está normalizado u ∈ [0, 1]; la relación voltios-nivel
de Fermi no se modela.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple, Union

import numpy as np

from config.defaults import PHYSICS
from utils.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

EV_TO_J = PHYSICS['q']


class CurveKind(str, Enum):
    TRANSMISSION = 'transmission'
    RESPONSIVITY = 'responsivity'


@dataclass(frozen=True)
class PhysicsConstants:
    q: float = PHYSICS['q']
    hbar: float = PHYSICS['hbar']
    v_f: float = PHYSICS['v_f']


CONSTANTS = PhysicsConstants()


@dataclass
class CurveDiagnostics:
    """Contador de evaluaciones recortadas al rango válido."""
    clamp_count: int = 0

    def record(self, count: int):
        if count:
            self.clamp_count += int(count)


@dataclass(frozen=True)
class ResponseCurve:
    """
    Polinomio de segundo orden sobre el código de puerta normalizado.

    Attributes:
        c2, c1, c0: Coeficientes (adimensionales; A/W para responsividad)
        kind: Transmisión (valores en [0, 1]) o responsividad (valores ≥ 0)
    """
    c2: float
    c1: float
    c0: float
    kind: CurveKind = CurveKind.TRANSMISSION

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.c2, self.c1, self.c0], dtype=float)

    def eval(self, u: ArrayLike, diagnostics: Optional[CurveDiagnostics] = None) -> ArrayLike:
        return eval_curve(self, u, diagnostics)

    def extrema(self) -> Tuple[float, float]:
        """Valores mínimo y máximo (sin recortar) sobre u ∈ [0, 1]."""
        candidates = [0.0, 1.0]
        if self.c2 != 0.0:
            vertex = -self.c1 / (2.0 * self.c2)
            if 0.0 < vertex < 1.0:
                candidates.append(vertex)
        values = [self.c2 * u * u + self.c1 * u + self.c0 for u in candidates]
        return min(values), max(values)

    def scaled(self, factors: ArrayLike) -> 'ResponseCurve':
        c2, c1, c0 = self.coefficients * np.asarray(factors, dtype=float)
        return ResponseCurve(float(c2), float(c1), float(c0), self.kind)


# Curvas nominales por defecto (tendencias: la transmisión crece con el
# dopado, la responsividad decrece). No son medidas.
DEFAULT_TRANSMISSION = ResponseCurve(0.5, 0.0, 0.25, CurveKind.TRANSMISSION)
DEFAULT_RESPONSIVITY = ResponseCurve(-0.5, 0.0, 0.8, CurveKind.RESPONSIVITY)


@dataclass(frozen=True)
class VariationSpec:
    """Variación de fabricación: ĉ = (1 + p/2 − pX)·c con X ~ U[0, 1]."""
    p: float = 0.0
    per_coefficient: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise DomainError(f"La variación p debe estar en [0, 1): {self.p}")


@dataclass(frozen=True)
class QuantizerSpec:
    """
    Precisión de DAC (códigos de puerta) y ADC (lectura de fila).

    Attributes:
        dac_bits: Bits del DAC; None = DAC ideal (puerta continua)
        adc_bits: Bits del ADC; None = ADC ideal
        adc_full_scale: Fondo de escala en A; None = automático tras calibrar
    """
    dac_bits: Optional[int] = 8
    adc_bits: Optional[int] = None
    adc_full_scale: Optional[float] = None

    def __post_init__(self):
        for name in ('dac_bits', 'adc_bits'):
            bits = getattr(self, name)
            if bits is not None and bits < 1:
                raise DomainError(f"{name} debe ser ≥ 1: {bits}")
        if self.adc_full_scale is not None and self.adc_full_scale <= 0:
            raise DomainError(f"adc_full_scale debe ser > 0: {self.adc_full_scale}")

    @property
    def ideal_dac(self) -> bool:
        return self.dac_bits is None

    @property
    def ideal_adc(self) -> bool:
        return self.adc_bits is None

    @property
    def dac_levels(self) -> Optional[int]:
        return None if self.dac_bits is None else 2 ** self.dac_bits

    @property
    def adc_levels(self) -> Optional[int]:
        return None if self.adc_bits is None else 2 ** self.adc_bits


@dataclass(frozen=True)
class NoiseSpec:
    """Ruido gaussiano aditivo en la lectura (A)."""
    sigma: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError(f"sigma debe ser ≥ 0: {self.sigma}")

    @property
    def active(self) -> bool:
        return self.enabled and self.sigma > 0


def _check_unit_interval(u: ArrayLike, name: str = 'u'):
    values = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
        raise DomainError(f"{name} debe estar en [0, 1]")


def _clamp_for_kind(values: np.ndarray, kind: CurveKind) -> Tuple[np.ndarray, int]:
    if kind == CurveKind.TRANSMISSION:
        clamped = np.clip(values, 0.0, 1.0)
    else:
        clamped = np.maximum(values, 0.0)
    count = int(np.count_nonzero(clamped != values))
    return clamped, count


def eval_curve(curve: ResponseCurve, u: ArrayLike,
               diagnostics: Optional[CurveDiagnostics] = None) -> ArrayLike:
    """
    Evalúa c2·u² + c1·u + c0 y recorta al rango válido del tipo de curva.

    Raises:
        DomainError: Si u está fuera de [0, 1]
    """
    _check_unit_interval(u)
    uu = np.asarray(u, dtype=float)
    raw = curve.c2 * uu * uu + curve.c1 * uu + curve.c0
    values, count = _clamp_for_kind(np.asarray(raw), curve.kind)
    if count:
        logger.debug(f"Curva {curve.kind.value} recortada en {count} puntos")
        if diagnostics is not None:
            diagnostics.record(count)
    return float(values) if np.ndim(values) == 0 else values


def eval_coefficients(coeffs: np.ndarray, u: np.ndarray, kind: CurveKind) -> Tuple[np.ndarray, int]:
    """
    Evaluación vectorizada sobre una rejilla de coeficientes.

    Args:
        coeffs: Array (..., 3) con (c2, c1, c0) por unidad
        u: Códigos normalizados, broadcast contra coeffs[..., 0]
        kind: Tipo de curva (para el recorte)

    Returns:
        Tupla (valores recortados, número de recortes)
    """
    raw = coeffs[..., 0] * u * u + coeffs[..., 1] * u + coeffs[..., 2]
    return _clamp_for_kind(raw, kind)


def fit_quadratic(samples: Iterable[Tuple[float, float]],
                  kind: CurveKind = CurveKind.TRANSMISSION) -> Tuple[ResponseCurve, float]:
    """
    Ajuste por mínimos cuadrados de un polinomio de segundo orden.

    Args:
        samples: Pares (u, valor)
        kind: Tipo de curva resultante

    Returns:
        Tupla (curva ajustada, RMS del residuo)

    Raises:
        NumericError: Si hay menos de 3 abscisas distintas
    """
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3 or len(np.unique(data[:, 0])) < 3:
        raise NumericError("Ajuste cuadrático con rango deficiente: hacen falta ≥ 3 abscisas distintas")
    u, y = data[:, 0], data[:, 1]
    design = np.vander(u, 3)
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ coeffs
    rms = float(np.sqrt(np.mean(residual ** 2)))
    return ResponseCurve(float(coeffs[0]), float(coeffs[1]), float(coeffs[2]), kind), rms


def variation_factor(p: float, x: ArrayLike) -> ArrayLike:
    """Factor multiplicativo 1 + p/2 − pX."""
    return 1.0 + p / 2.0 - p * np.asarray(x, dtype=float)


def apply_variation(curve: ResponseCurve, spec: VariationSpec, x: ArrayLike) -> ResponseCurve:
    """
    Aplica la variación de fabricación a una curva.

    Con un único X (modo por unidad) los tres coeficientes se escalan por el
    mismo factor; en modo por coeficiente x tiene tres componentes.
    """
    x = np.asarray(x, dtype=float)
    if spec.per_coefficient and x.shape != (3,):
        raise DomainError("El modo por coeficiente necesita tres sorteos X")
    _check_unit_interval(x, 'X')
    return curve.scaled(variation_factor(spec.p, x))


def damping_to_mobility(gamma_ev: float, fermi_ev: float,
                        constants: PhysicsConstants = CONSTANTS) -> float:
    """
    Convierte la constante de amortiguamiento en movilidad de portadores.

    µ = q·ħ·v_F² / (γ·E_F), con γ y E_F en eV.

    Returns:
        Movilidad en cm²/(V·s)
    """
    if not gamma_ev > 0 or not fermi_ev > 0:
        raise DomainError(f"gamma y E_F deben ser > 0: gamma={gamma_ev}, E_F={fermi_ev}")
    gamma_j = gamma_ev * EV_TO_J
    fermi_j = fermi_ev * EV_TO_J
    mobility_si = constants.q * constants.hbar * constants.v_f ** 2 / (gamma_j * fermi_j)
    return mobility_si * 1e4


def round_half_down(x: ArrayLike) -> ArrayLike:
    """Redondeo al entero más cercano; los empates van al código inferior."""
    return np.ceil(np.asarray(x, dtype=float) - 0.5)


def quantize_gate(u: ArrayLike, q: QuantizerSpec) -> Tuple[ArrayLike, ArrayLike]:
    """
    Cuantiza el código de puerta al nivel del DAC más cercano.

    Returns:
        Tupla (código entero, u realizado). Con DAC ideal el código es el
        propio u.

    Raises:
        DomainError: Si u no está en [0, 1]
    """
    _check_unit_interval(u)
    uu = np.asarray(u, dtype=float)
    if q.ideal_dac:
        return (float(uu) if uu.ndim == 0 else uu), (float(uu) if uu.ndim == 0 else uu)
    top = q.dac_levels - 1
    code = round_half_down(uu * top).astype(np.int64)
    realized = code / top
    if code.ndim == 0:
        return int(code), float(realized)
    return code, realized


def dequantize_gate(code: ArrayLike, q: QuantizerSpec) -> ArrayLike:
    """Valor u realizado por un código del DAC."""
    if q.ideal_dac:
        return np.asarray(code, dtype=float)
    return np.asarray(code, dtype=float) / (q.dac_levels - 1)


def adc_convert(current: ArrayLike, q: QuantizerSpec, full_scale: Optional[float] = None) -> np.ndarray:
    """
    Conversión ADC: recorte a [0, fondo de escala] y cuantización uniforme.

    Con ADC ideal la corriente pasa sin recortar ni cuantizar, así que con
    ruido la lectura puede ser negativa: la cota [0, fondo de escala] de
    RowReadout solo se cumple con ADC finito.
    """
    values = np.asarray(current, dtype=float)
    if q.ideal_adc:
        return values
    scale = full_scale if full_scale is not None else q.adc_full_scale
    if scale is None or scale <= 0:
        raise DomainError("El ADC finito necesita un fondo de escala > 0")
    top = q.adc_levels - 1
    clipped = np.clip(values, 0.0, scale)
    code = round_half_down(clipped / scale * top)
    return code * (scale / top)


def read_with_noise_and_adc(current: ArrayLike, noise: NoiseSpec, q: QuantizerSpec,
                            rng: Optional[np.random.Generator],
                            full_scale: Optional[float] = None) -> ArrayLike:
    """
    Lectura con ruido gaussiano aditivo y ADC.

    Devuelve ADC(I + N(0, sigma²)); con sigma = 0 y ADC ideal devuelve I.
    """
    values = np.asarray(current, dtype=float)
    if noise.active:
        if rng is None:
            raise DomainError("La lectura con ruido necesita un generador aleatorio")
        values = values + noise.sigma * rng.standard_normal(values.shape)
    out = adc_convert(values, q, full_scale)
    return float(out) if np.ndim(out) == 0 else out
