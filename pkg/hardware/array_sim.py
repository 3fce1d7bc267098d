"""
Simulación del array físico: plano N×N de SLM y plano N×N de fotodetectores.

Las lecturas de fila son el único camino para observar los dispositivos.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np

from .device_model import (
    CurveDiagnostics,
    CurveKind,
    NoiseSpec,
    QuantizerSpec,
    ResponseCurve,
    VariationSpec,
    dequantize_gate,
    eval_coefficients,
    read_with_noise_and_adc,
    variation_factor,
)
from utils.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)


class Plane(IntEnum):
    SLM = 0
    PD = 1


# Claves de las sub-secuencias aleatorias derivadas de la semilla
NOISE_STREAM = 2
KEYED_STREAM = 3


@dataclass
class RowReadout:
    """
    Corrientes de fila (A) de una exposición.

    Con ADC finito cada valor está en [0, fondo de escala]; con ADC ideal y
    ruido activo puede ser negativo.
    """
    values: np.ndarray
    pass_id: int


class ArrayInstance:
    """
    Estado físico del array.

    Las curvas por unidad se congelan en la construcción; los códigos de
    puerta son el único estado mutable junto con el generador de ruido.

    Attributes:
        n: Dimensión del array
        p0: Potencia de entrada por píxel (W)
        quantizer: Especificación DAC/ADC
        noise: Especificación del ruido de lectura
        diagnostics: Recortes de curva acumulados
    """

    def __init__(self, n: int, slm_coeffs: np.ndarray, pd_coeffs: np.ndarray,
                 quantizer: QuantizerSpec, noise: NoiseSpec, p0: float, seed: int,
                 full_scale: Optional[float] = None):
        self.n = n
        self.p0 = float(p0)
        self.seed = int(seed)
        self.quantizer = quantizer
        self.noise = noise
        self._slm_coeffs = np.array(slm_coeffs, dtype=float)
        self._pd_coeffs = np.array(pd_coeffs, dtype=float)
        self._slm_coeffs.setflags(write=False)
        self._pd_coeffs.setflags(write=False)
        self.full_scale = full_scale if full_scale is not None else quantizer.adc_full_scale
        self.rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(NOISE_STREAM,)))
        self.diagnostics = CurveDiagnostics()
        self.pass_count = 0
        code_dtype = float if quantizer.ideal_dac else np.int64
        self.slm_codes = np.zeros((n, n), dtype=code_dtype)
        self.pd_codes = np.zeros((n, n), dtype=code_dtype)

    @property
    def slm_coefficients(self) -> np.ndarray:
        return self._slm_coeffs

    @property
    def pd_coefficients(self) -> np.ndarray:
        return self._pd_coeffs

    @property
    def dac_levels(self) -> Optional[int]:
        return self.quantizer.dac_levels

    def curve(self, plane: Plane, j: int, i: int) -> ResponseCurve:
        """Curva post-variación de la unidad (plane, j, i)."""
        if plane == Plane.SLM:
            c2, c1, c0 = self._slm_coeffs[j, i]
            return ResponseCurve(c2, c1, c0, CurveKind.TRANSMISSION)
        c2, c1, c0 = self._pd_coeffs[j, i]
        return ResponseCurve(c2, c1, c0, CurveKind.RESPONSIVITY)

    def set_full_scale(self, full_scale: float):
        if full_scale <= 0:
            raise DomainError(f"El fondo de escala debe ser > 0: {full_scale}")
        self.full_scale = float(full_scale)
        logger.info(f"Fondo de escala del ADC fijado a {self.full_scale:.6g} A")

    def noise_stream(self, *key: int) -> np.random.Generator:
        """Generador de ruido derivado de (semilla, clave)."""
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(KEYED_STREAM,) + tuple(int(k) for k in key))
        )

    def validate_codes(self, codes: np.ndarray, plane: Plane) -> np.ndarray:
        """Comprueba que los códigos están dentro del rango del DAC."""
        codes = np.asarray(codes)
        if codes.shape[-2:] != (self.n, self.n):
            raise DomainError(f"Rejilla de códigos {codes.shape} incompatible con N={self.n}")
        if self.quantizer.ideal_dac:
            bad = ~np.isfinite(codes) | (codes < 0.0) | (codes > 1.0)
        else:
            if not np.issubdtype(codes.dtype, np.integer):
                if np.any(codes != np.round(codes)):
                    raise DomainError(f"Códigos no enteros en el plano {plane.name}")
                codes = codes.astype(np.int64)
            bad = (codes < 0) | (codes > self.quantizer.dac_levels - 1)
        if np.any(bad):
            where = tuple(int(x) for x in np.argwhere(bad)[0])
            j, i = where[-2:]
            raise DomainError(
                f"Código fuera de rango en (plano={plane.name}, j={j}, i={i}): "
                f"{codes[where]}"
            )
        return codes

    def row_currents(self, slm_codes: np.ndarray, pd_codes: np.ndarray) -> np.ndarray:
        """Suma sin ruido Σ_i P0·T_ji·R_ji para un lote (..., N, N) de códigos."""
        u_slm = dequantize_gate(slm_codes, self.quantizer)
        u_pd = dequantize_gate(pd_codes, self.quantizer)
        transmission, n_t = eval_coefficients(self._slm_coeffs, u_slm, CurveKind.TRANSMISSION)
        responsivity, n_r = eval_coefficients(self._pd_coeffs, u_pd, CurveKind.RESPONSIVITY)
        if n_t or n_r:
            self.diagnostics.record(n_t + n_r)
        return (self.p0 * transmission * responsivity).sum(axis=-1)

    def expose_batch(self, slm_codes: np.ndarray, pd_codes: np.ndarray,
                     rng: Optional[np.random.Generator] = None,
                     item_rngs: Optional[Sequence[np.random.Generator]] = None) -> np.ndarray:
        """
        Expone un lote de configuraciones de códigos y lee todas las filas.

        Cada elemento del lote es una pasada independiente con un sorteo de
        ruido por fila.

        Args:
            slm_codes: Códigos (B, N, N) o (N, N) del plano SLM
            pd_codes: Códigos del plano de detectores, misma forma
            rng: Generador para todo el lote (por defecto el del array)
            item_rngs: Un generador por elemento del lote

        Returns:
            Lecturas (B, N) o (N,)
        """
        slm_codes = np.asarray(slm_codes)
        pd_codes = np.asarray(pd_codes)
        currents = self.row_currents(slm_codes, pd_codes)
        if not self.quantizer.ideal_adc and self.full_scale is None:
            raise DomainError("ADC finito sin fondo de escala")
        self.pass_count += int(np.prod(currents.shape[:-1], dtype=np.int64)) if currents.ndim > 1 else 1
        if item_rngs is None:
            return read_with_noise_and_adc(currents, self.noise, self.quantizer, rng or self.rng,
                                           self.full_scale)
        rows = currents.reshape(-1, self.n)
        if len(item_rngs) != len(rows):
            raise DomainError(f"Se esperaban {len(rows)} generadores, recibidos {len(item_rngs)}")
        reads = [read_with_noise_and_adc(row, self.noise, self.quantizer, g, self.full_scale)
                 for row, g in zip(rows, item_rngs)]
        return np.stack(reads).reshape(currents.shape)


def _unit_draws(seed: int, plane: Plane, n: int, size: int) -> np.ndarray:
    """Sorteos X ~ U[0, 1] por unidad, cada uno de su propia sub-secuencia."""
    draws = np.empty((n, n, size))
    for j in range(n):
        for i in range(n):
            stream = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(plane), j, i)))
            draws[j, i] = stream.random(size)
    return draws


def _vary_grid(curve: ResponseCurve, spec: VariationSpec, draws: np.ndarray) -> np.ndarray:
    factors = variation_factor(spec.p, draws)
    if not spec.per_coefficient:
        factors = np.repeat(factors[..., :1], 3, axis=-1)
    return curve.coefficients * factors


def provisional_full_scale(n: int, p0: float, slm: ResponseCurve, pd: ResponseCurve,
                           variation: VariationSpec) -> float:
    """Cota superior de la suma de fila a partir de las curvas nominales."""
    _, t_max = slm.extrema()
    _, r_max = pd.extrema()
    bound = n * p0 * min(max(t_max, 0.0) * (1 + variation.p / 2), 1.0) * max(r_max, 0.0) * (1 + variation.p / 2)
    return bound if bound > 0 else 1.0


def build_array(config, seed: Optional[int] = None) -> ArrayInstance:
    """
    Construye un array con variación de fabricación por unidad.

    Args:
        config: RunConfig validada
        seed: Semilla (por defecto config.seed)

    Returns:
        ArrayInstance determinista para (config, semilla)

    Raises:
        ConfigError: Si la configuración no es coherente
    """
    seed = config.seed if seed is None else seed
    n = config.n
    if n < 1:
        raise ConfigError("debe ser ≥ 1", "array.n")

    variation = config.variation_spec()
    slm_nominal = config.slm_curve()
    pd_nominal = config.pd_curve()
    size = 3 if variation.per_coefficient else 1

    slm_coeffs = _vary_grid(slm_nominal, variation, _unit_draws(seed, Plane.SLM, n, size))
    pd_coeffs = _vary_grid(pd_nominal, variation, _unit_draws(seed, Plane.PD, n, size))

    quantizer = config.quantizer()
    full_scale = quantizer.adc_full_scale
    if full_scale is None and not quantizer.ideal_adc:
        full_scale = provisional_full_scale(n, config.p0, slm_nominal, pd_nominal, variation)

    array = ArrayInstance(
        n=n,
        slm_coeffs=slm_coeffs,
        pd_coeffs=pd_coeffs,
        quantizer=quantizer,
        noise=config.noise_spec(),
        p0=config.p0,
        seed=seed,
        full_scale=full_scale,
    )
    logger.info(f"Array {n}×{n} construido (p={variation.p}, semilla={seed})")
    return array


def set_codes(a: ArrayInstance, slm_codes: np.ndarray, pd_codes: np.ndarray):
    """Fija los códigos de puerta de ambos planos (sin efectos de lectura)."""
    slm = a.validate_codes(slm_codes, Plane.SLM)
    pd = a.validate_codes(pd_codes, Plane.PD)
    a.slm_codes = np.array(slm, dtype=a.slm_codes.dtype)
    a.pd_codes = np.array(pd, dtype=a.pd_codes.dtype)


def expose_and_read(a: ArrayInstance) -> RowReadout:
    """Una exposición con los códigos actuales."""
    values = a.expose_batch(a.slm_codes, a.pd_codes)
    return RowReadout(values=np.asarray(values), pass_id=a.pass_count)
