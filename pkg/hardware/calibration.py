"""
Procedimiento de corrección por fila.

Para cada par (SLM, detector) de una fila se barren por separado el código
del SLM y el del detector, se obtienen tablas de sintonía y se define la
unidad física de la fila como el mínimo rango de sintonía de producto entre
sus pares. La decodificación en cuatro pasadas cancela los términos cruzados:

    S(v,w) − S(v,0) − S(0,w) + S(0,0) = Σ_i P0·ΔT_i(v)·ΔR_i(w)

y con ΔR_i reescalado para que P0·ΔT_i·ΔR_i = U_fila en todos los pares, la
división por U_fila devuelve Σ_i v_i·w_i.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .array_sim import ArrayInstance, Plane
from .device_model import CurveKind, QuantizerSpec, ResponseCurve, fit_quadratic
from utils.errors import CalibrationError, DomainError, FormatError

logger = logging.getLogger(__name__)

CALIBRATION_FORMAT_VERSION = 1

# Elementos por bloque en la búsqueda del código más cercano
_SEARCH_CHUNK = 1 << 22
_BISECTION_STEPS = 64


def _extreme_positions(coeffs: np.ndarray) -> Tuple[float, float]:
    """Posiciones (u_min, u_max) de un polinomio de segundo orden en [0, 1]."""
    c2, c1, _ = coeffs
    candidates = [0.0, 1.0]
    if c2 != 0.0:
        vertex = -c1 / (2.0 * c2)
        if 0.0 < vertex < 1.0:
            candidates.append(float(vertex))
    values = np.polyval(coeffs, candidates)
    return candidates[int(np.argmin(values))], candidates[int(np.argmax(values))]


def code_grid(quantizer: QuantizerSpec, lut_points: int) -> np.ndarray:
    """Códigos barridos: todos los niveles del DAC, o una rejilla densa si es ideal."""
    if quantizer.ideal_dac:
        return np.linspace(0.0, 1.0, lut_points)
    return np.arange(quantizer.dac_levels, dtype=np.int64)


@dataclass
class SweepModel:
    """
    Respuesta de un barrido 1-D de un dispositivo.

    Con DAC finito la respuesta es la propia tabla medida; con DAC ideal se
    ajusta una parábola a la tabla y se trabaja sobre el ajuste.
    """
    grid: np.ndarray
    lut: np.ndarray
    fitted: Optional[np.ndarray] = None
    lo_code: float = 0
    hi_code: float = 0

    @classmethod
    def from_lut(cls, grid: np.ndarray, lut: np.ndarray, ideal: bool) -> 'SweepModel':
        if ideal:
            curve, rms = fit_quadratic(zip(grid, lut), CurveKind.TRANSMISSION)
            coeffs = curve.coefficients
            lo, hi = _extreme_positions(coeffs)
            logger.debug(f"Ajuste parabólico del barrido: RMS {rms:.3g}")
            return cls(grid=grid, lut=lut, fitted=coeffs, lo_code=lo, hi_code=hi)
        return cls(grid=grid, lut=lut, lo_code=int(np.argmin(lut)), hi_code=int(np.argmax(lut)))

    def value(self, code) -> float:
        if self.fitted is not None:
            return float(np.polyval(self.fitted, float(code)))
        return float(self.lut[int(code)])

    @property
    def lo_value(self) -> float:
        return self.value(self.lo_code)

    @property
    def hi_value(self) -> float:
        return self.value(self.hi_code)

    @property
    def swing(self) -> float:
        return self.hi_value - self.lo_value

    def normalized_levels(self) -> np.ndarray:
        return (self.lut - self.lo_value) / self.swing

    def normalized_poly(self) -> np.ndarray:
        poly = np.array(self.fitted, dtype=float)
        poly[2] -= self.lo_value
        return poly / self.swing


@dataclass
class EncodingTable:
    """
    Respuesta normalizada de P dispositivos: 0 en el código base y 1 en el de
    máxima respuesta.

    Attributes:
        levels: (P, L) respuesta normalizada en cada código (DAC finito)
        poly: (P, 3) parábola normalizada (DAC ideal)
        segment: (P, 2) posiciones (u_base, u_max) de la parábola
    """
    levels: Optional[np.ndarray] = None
    poly: Optional[np.ndarray] = None
    segment: Optional[np.ndarray] = None

    @property
    def ideal(self) -> bool:
        return self.poly is not None

    @property
    def size(self) -> int:
        return len(self.poly) if self.ideal else len(self.levels)

    @classmethod
    def from_models(cls, models: Sequence[SweepModel], ideal: bool) -> 'EncodingTable':
        if ideal:
            return cls(
                poly=np.stack([m.normalized_poly() for m in models]),
                segment=np.array([[m.lo_code, m.hi_code] for m in models], dtype=float),
            )
        return cls(levels=np.stack([m.normalized_levels() for m in models]))

    @classmethod
    def concatenate(cls, tables: Sequence['EncodingTable']) -> 'EncodingTable':
        if tables[0].ideal:
            return cls(poly=np.concatenate([t.poly for t in tables]),
                       segment=np.concatenate([t.segment for t in tables]))
        return cls(levels=np.concatenate([t.levels for t in tables]))

    def response(self, codes: np.ndarray) -> np.ndarray:
        """Respuesta normalizada realizada por códigos (..., P)."""
        codes = np.asarray(codes)
        if self.ideal:
            u = codes.astype(float)
            return self.poly[:, 0] * u * u + self.poly[:, 1] * u + self.poly[:, 2]
        pairs = np.arange(self.size)
        return self.levels[pairs, codes]

    def encode(self, targets: np.ndarray) -> np.ndarray:
        """
        Códigos que realizan las respuestas normalizadas objetivo.

        Con DAC finito se busca el nivel de la tabla más cercano sobre todos
        los códigos (los empates van al código inferior); con DAC ideal se
        bisecciona sobre el tramo monótono entre los extremos del ajuste.

        Args:
            targets: Objetivos (..., P) en [0, 1]
        """
        targets = np.asarray(targets, dtype=float)
        shape = targets.shape
        flat = targets.reshape(-1, self.size)
        if self.ideal:
            codes = self._bisect(flat)
        else:
            codes = self._nearest(flat)
        return codes.reshape(shape)

    def _nearest(self, targets: np.ndarray) -> np.ndarray:
        n_levels = self.levels.shape[1]
        chunk = max(1, _SEARCH_CHUNK // (self.size * n_levels))
        out = np.empty(targets.shape, dtype=np.int64)
        for start in range(0, len(targets), chunk):
            block = targets[start:start + chunk]
            distance = np.abs(self.levels[None, :, :] - block[:, :, None])
            out[start:start + chunk] = np.argmin(distance, axis=-1)
        return out

    def _bisect(self, targets: np.ndarray) -> np.ndarray:
        u_lo, u_hi = self.segment[:, 0], self.segment[:, 1]
        span = u_hi - u_lo
        s_lo = np.zeros_like(targets)
        s_hi = np.ones_like(targets)
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (s_lo + s_hi)
            u = u_lo + mid * span
            value = self.poly[:, 0] * u * u + self.poly[:, 1] * u + self.poly[:, 2]
            below = value < targets
            s_lo = np.where(below, mid, s_lo)
            s_hi = np.where(below, s_hi, mid)
        s = 0.5 * (s_lo + s_hi)
        s = np.where(targets <= 0.0, 0.0, np.where(targets >= 1.0, 1.0, s))
        return np.clip(u_lo + s * span, 0.0, 1.0)


@dataclass
class PairTable:
    """
    Tablas de sintonía de un par (SLM, detector).

    Attributes:
        slm_lut: Lecturas barriendo el código del SLM (detector en pd_ref)
        pd_lut: Lecturas barriendo el código del detector (SLM en slm_ref)
        i00: Lectura con ambos dispositivos en sus códigos base
        t_range, r_range: Rangos efectivos (mín, máx) de cada barrido
        gain: Rango de producto P0·ΔT·ΔR (A)
    """
    slm_lut: np.ndarray
    pd_lut: np.ndarray
    i00: float
    slm_ref: float
    pd_ref: float
    t_lo: float
    t_hi: float
    r_lo: float
    r_hi: float
    t_range: Tuple[float, float]
    r_range: Tuple[float, float]
    gain: float


@dataclass
class RowCalibration:
    """
    Calibración de una fila.

    Attributes:
        row: Índice de fila
        pairs: Tablas de los N pares
        gains: Rango de producto g_i de cada par (A)
        unit: Unidad de la fila U_j = min_i g_i (A)
        pd_swing_scale: Reducción del recorrido del detector U_j / g_i ∈ (0, 1]
        slm_baseline, pd_baseline: Códigos base por par
        s00: Lectura de fila con todos los pares en sus códigos base
    """
    row: int
    pairs: List[PairTable]
    gains: np.ndarray
    unit: float
    pd_swing_scale: np.ndarray
    slm_baseline: np.ndarray
    pd_baseline: np.ndarray
    slm_table: EncodingTable
    pd_table: EncodingTable
    s00: Optional[float] = None

    def encode(self, v: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Códigos (SLM, detector) para valores v, w ∈ [0, 1] de forma (..., N)."""
        _check_values(v, 'v')
        _check_values(w, 'w')
        slm = self.slm_table.encode(v)
        pd = self.pd_table.encode(np.asarray(w, dtype=float) * self.pd_swing_scale)
        return slm, pd


def _check_values(values, name: str):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
        raise DomainError(f"{name} debe estar en [0, 1]")


@dataclass
class ArrayCalibration:
    """Calibración de todas las filas de un array."""
    rows: List[RowCalibration]
    n: int
    dac_bits: Optional[int]
    lut_points: int
    full_scale: Optional[float] = None
    naive: bool = False
    _slm_all: Optional[EncodingTable] = field(default=None, repr=False)
    _pd_all: Optional[EncodingTable] = field(default=None, repr=False)

    @property
    def units(self) -> np.ndarray:
        return np.array([r.unit for r in self.rows])

    @property
    def pd_swing_scale(self) -> np.ndarray:
        return np.stack([r.pd_swing_scale for r in self.rows])

    @property
    def slm_baseline(self) -> np.ndarray:
        return np.stack([r.slm_baseline for r in self.rows])

    @property
    def pd_baseline(self) -> np.ndarray:
        return np.stack([r.pd_baseline for r in self.rows])

    @property
    def s00(self) -> Optional[np.ndarray]:
        if any(r.s00 is None for r in self.rows):
            return None
        return np.array([r.s00 for r in self.rows])

    def encode_slm(self, targets: np.ndarray) -> np.ndarray:
        """Códigos SLM para objetivos (..., N, N) en [0, 1]."""
        if self._slm_all is None:
            self._slm_all = EncodingTable.concatenate([r.slm_table for r in self.rows])
        shape = np.shape(targets)
        return self._slm_all.encode(np.reshape(targets, shape[:-2] + (self.n * self.n,))).reshape(shape)

    def encode_pd(self, targets: np.ndarray) -> np.ndarray:
        """Códigos de detector para objetivos (..., N, N) en [0, 1] (sin reescalar)."""
        if self._pd_all is None:
            self._pd_all = EncodingTable.concatenate([r.pd_table for r in self.rows])
        scaled = np.asarray(targets, dtype=float) * self.pd_swing_scale
        shape = scaled.shape
        return self._pd_all.encode(scaled.reshape(shape[:-2] + (self.n * self.n,))).reshape(shape)


def _park_codes(a: ArrayInstance) -> np.ndarray:
    return np.zeros((a.n, a.n), dtype=float if a.quantizer.ideal_dac else np.int64)


def _measure(a: ArrayInstance, j: int, slm: np.ndarray, pd: np.ndarray, repeats: int) -> np.ndarray:
    """Lecturas medias de la fila j para un lote (G, N, N), promediando exposiciones."""
    count = slm.shape[0]
    slm_rep = np.tile(slm, (repeats, 1, 1))
    pd_rep = np.tile(pd, (repeats, 1, 1))
    reads = a.expose_batch(slm_rep, pd_rep)[:, j]
    return reads.reshape(repeats, count).mean(axis=0)


def _sweep(a: ArrayInstance, j: int, i: int, park: np.ndarray, grid: np.ndarray,
           plane: Plane, fixed, repeats: int) -> np.ndarray:
    count = len(grid)
    slm = np.repeat(park[None], count, axis=0)
    pd = np.repeat(park[None], count, axis=0)
    swept, held = (slm, pd) if plane == Plane.SLM else (pd, slm)
    swept[:, j, i] = grid
    held[:, j, i] = fixed
    return _measure(a, j, slm, pd, repeats)


def _pair_gain(slm: SweepModel, pd: SweepModel, i00: float, slm_ref, pd_ref) -> float:
    """
    Rango de producto P0·ΔT·ΔR a partir de los dos barridos 1-D.

    Por separabilidad (I = P0·T·R) la combinación de cuatro lecturas da
    P0·(T_ref − T_lo)·(R_ref − R_lo); los cocientes de cada barrido la llevan
    a los extremos, sea cual sea la referencia.
    """
    s_ref = slm.value(slm_ref)
    cross = s_ref - slm.lo_value - pd.lo_value + i00
    t_ref_swing = s_ref - slm.lo_value
    r_ref_swing = pd.value(pd_ref) - pd.lo_value
    if t_ref_swing <= 0 or r_ref_swing <= 0:
        return 0.0
    return cross * (slm.swing / t_ref_swing) * (pd.swing / r_ref_swing)


def _build_pair(grid, slm_lut, pd_lut, i00, slm_ref, pd_ref, ideal) -> Tuple[PairTable, SweepModel, SweepModel]:
    slm = SweepModel.from_lut(grid, slm_lut, ideal)
    pd = SweepModel.from_lut(grid, pd_lut, ideal)
    gain = _pair_gain(slm, pd, i00, slm_ref, pd_ref)
    table = PairTable(
        slm_lut=np.asarray(slm_lut),
        pd_lut=np.asarray(pd_lut),
        i00=float(i00),
        slm_ref=slm_ref,
        pd_ref=pd_ref,
        t_lo=slm.lo_code,
        t_hi=slm.hi_code,
        r_lo=pd.lo_code,
        r_hi=pd.hi_code,
        t_range=(slm.lo_value, slm.hi_value),
        r_range=(pd.lo_value, pd.hi_value),
        gain=float(gain),
    )
    return table, slm, pd


def _assemble_row(j: int, tables: List[PairTable], slm_models, pd_models, ideal: bool,
                  s00: Optional[float] = None) -> RowCalibration:
    gains = np.array([t.gain for t in tables])
    for i, (gain, slm, pd) in enumerate(zip(gains, slm_models, pd_models)):
        if not np.isfinite(gain) or gain <= 0 or slm.swing <= 0 or pd.swing <= 0:
            raise CalibrationError(f"Par degenerado sin rango de sintonía: fila {j}, par {i} (g={gain:.3g})")
    unit = float(gains.min())
    code_type = float if ideal else np.int64
    return RowCalibration(
        row=j,
        pairs=tables,
        gains=gains,
        unit=unit,
        pd_swing_scale=unit / gains,
        slm_baseline=np.array([t.t_lo for t in tables], dtype=code_type),
        pd_baseline=np.array([t.r_lo for t in tables], dtype=code_type),
        slm_table=EncodingTable.from_models(slm_models, ideal),
        pd_table=EncodingTable.from_models(pd_models, ideal),
        s00=s00,
    )


def measure_baseline(a: ArrayInstance, j: int, cal: RowCalibration, repeats: int) -> float:
    """Lectura S(0,0) de la fila j con todos sus pares en los códigos base."""
    slm = _park_codes(a)
    pd = _park_codes(a)
    slm[j] = cal.slm_baseline
    pd[j] = cal.pd_baseline
    return float(_measure(a, j, slm[None], pd[None], repeats)[0])


def calibrate_row(a: ArrayInstance, j: int, repeats: int = 16, lut_points: int = 257,
                  slm_ref=None, pd_ref=None) -> RowCalibration:
    """
    Calibra la fila j par a par.

    Para cada par: los demás pares quedan aparcados; se barre el código del
    SLM con el detector en su referencia de máxima respuesta y después el del
    detector con el SLM en la suya; cada muestra promedia `repeats`
    exposiciones.

    Args:
        a: Array construido
        j: Índice de fila
        repeats: Exposiciones promediadas por muestra
        lut_points: Muestras del barrido si el DAC es ideal
        slm_ref, pd_ref: Códigos de referencia (por defecto, los de máxima respuesta)

    Returns:
        RowCalibration de la fila

    Raises:
        CalibrationError: Si algún par no tiene rango de sintonía
    """
    if not 0 <= j < a.n:
        raise DomainError(f"Fila fuera de rango: {j}")
    if repeats < 1:
        raise DomainError(f"repeats debe ser ≥ 1: {repeats}")

    ideal = a.quantizer.ideal_dac
    grid = code_grid(a.quantizer, lut_points)
    park = _park_codes(a)
    tables, slm_models, pd_models = [], [], []

    for i in range(a.n):
        b = pd_ref
        if b is None:
            pd_sweep = _sweep(a, j, i, park, grid, Plane.PD, park[j, i], repeats)
            b = grid[int(np.argmax(pd_sweep))]
        slm_lut = _sweep(a, j, i, park, grid, Plane.SLM, b, repeats)
        ref = slm_ref if slm_ref is not None else grid[int(np.argmax(slm_lut))]
        pd_lut = _sweep(a, j, i, park, grid, Plane.PD, ref, repeats)

        slm_model = SweepModel.from_lut(grid, slm_lut, ideal)
        pd_model = SweepModel.from_lut(grid, pd_lut, ideal)
        slm_base = np.array(park, copy=True)
        pd_base = np.array(park, copy=True)
        slm_base[j, i] = slm_model.lo_code
        pd_base[j, i] = pd_model.lo_code
        i00 = float(_measure(a, j, slm_base[None], pd_base[None], repeats)[0])

        table, slm_model, pd_model = _build_pair(grid, slm_lut, pd_lut, i00, ref, b, ideal)
        tables.append(table)
        slm_models.append(slm_model)
        pd_models.append(pd_model)

    cal = _assemble_row(j, tables, slm_models, pd_models, ideal)
    cal.s00 = measure_baseline(a, j, cal, repeats)
    logger.info(
        f"Fila {j} calibrada: U={cal.unit:.6g} A, "
        f"reducción mínima del detector {cal.pd_swing_scale.min():.3f}"
    )
    return cal


def calibrate_array(a: ArrayInstance, repeats: int = 16, lut_points: int = 257) -> ArrayCalibration:
    """
    Calibra todas las filas; con fondo de escala automático, lo fija a la
    máxima suma de fila alcanzable medida y vuelve a medir S(0,0).
    """
    rows = [calibrate_row(a, j, repeats, lut_points) for j in range(a.n)]
    cal = ArrayCalibration(rows=rows, n=a.n, dac_bits=a.quantizer.dac_bits,
                           lut_points=lut_points, full_scale=a.full_scale)

    if not a.quantizer.ideal_adc and a.quantizer.adc_full_scale is None:
        slm_hi = np.array([[p.t_hi for p in r.pairs] for r in rows], dtype=a.slm_codes.dtype)
        pd_hi = np.array([[p.r_hi for p in r.pairs] for r in rows], dtype=a.pd_codes.dtype)
        reads = a.expose_batch(np.tile(slm_hi, (repeats, 1, 1)), np.tile(pd_hi, (repeats, 1, 1)))
        a.set_full_scale(float(reads.mean(axis=0).max()))
        cal.full_scale = a.full_scale
        for r in rows:
            r.s00 = measure_baseline(a, r.row, r, repeats)
    return cal


def nominal_calibration(config, quantizer: Optional[QuantizerSpec] = None) -> ArrayCalibration:
    """
    Codificación directa sin corrección: supone que todos los dispositivos
    siguen las curvas nominales y usa la unidad nominal en todas las filas.
    S(0,0) no se cachea y se mide en cada multiplicación.
    """
    quantizer = quantizer or config.quantizer()
    ideal = quantizer.ideal_dac
    grid = code_grid(quantizer, config.lut_points)
    u = grid if ideal else grid / (quantizer.dac_levels - 1)

    def model(curve: ResponseCurve) -> SweepModel:
        values = np.asarray(curve.eval(u), dtype=float)
        if ideal:
            coeffs = curve.coefficients
            lo, hi = _extreme_positions(coeffs)
            return SweepModel(grid=grid, lut=values, fitted=coeffs, lo_code=lo, hi_code=hi)
        return SweepModel(grid=grid, lut=values, lo_code=int(np.argmin(values)), hi_code=int(np.argmax(values)))

    slm = model(config.slm_curve())
    pd = model(config.pd_curve())
    gain = config.p0 * slm.swing * pd.swing
    if gain <= 0:
        raise CalibrationError("Las curvas nominales no tienen rango de sintonía")

    rows = []
    for j in range(config.n):
        table = PairTable(
            slm_lut=slm.lut, pd_lut=pd.lut, i00=float('nan'),
            slm_ref=slm.hi_code, pd_ref=pd.hi_code,
            t_lo=slm.lo_code, t_hi=slm.hi_code, r_lo=pd.lo_code, r_hi=pd.hi_code,
            t_range=(slm.lo_value, slm.hi_value), r_range=(pd.lo_value, pd.hi_value),
            gain=gain,
        )
        row = _assemble_row(j, [table] * config.n, [slm] * config.n, [pd] * config.n, ideal)
        rows.append(row)
    return ArrayCalibration(rows=rows, n=config.n, dac_bits=quantizer.dac_bits,
                            lut_points=config.lut_points, naive=True)


def encode_pair(cal: RowCalibration, i: int, v: float, w: float) -> Tuple:
    """Códigos (SLM, detector) del par i para los valores v, w ∈ [0, 1]."""
    _check_values(v, 'v')
    _check_values(w, 'w')
    if not 0 <= i < len(cal.pairs):
        raise DomainError(f"Par fuera de rango: {i}")
    v_row = np.zeros(len(cal.pairs))
    w_row = np.zeros(len(cal.pairs))
    v_row[i] = v
    w_row[i] = w
    slm, pd = cal.encode(v_row, w_row)
    slm_code, pd_code = slm[i], pd[i]
    if cal.slm_table.ideal:
        return float(slm_code), float(pd_code)
    return int(slm_code), int(pd_code)


def decode_row(s_vw, s_v0, s_0w, s_00, cal) -> np.ndarray:
    """
    Valor algebraico de una fila a partir de las cuatro lecturas.

    Args:
        s_vw, s_v0, s_0w, s_00: Lecturas de las pasadas (v,w), (v,0), (0,w), (0,0)
        cal: RowCalibration, o ArrayCalibration para decodificar todas las filas

    Raises:
        CalibrationError: Si la unidad no es positiva
    """
    unit = np.asarray(cal.units if isinstance(cal, ArrayCalibration) else cal.unit, dtype=float)
    if np.any(~np.isfinite(unit)) or np.any(unit <= 0):
        raise CalibrationError("Unidad de fila no válida (≤ 0)")
    combined = np.asarray(s_vw) - np.asarray(s_v0) - np.asarray(s_0w) + np.asarray(s_00)
    return combined / unit


def _digest(values: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(values, dtype='>f8').tobytes()).hexdigest()


def _scalar(value):
    return int(value) if isinstance(value, (np.integer,)) else float(value)


def save_calibration(cal: ArrayCalibration, path: str) -> Path:
    """Guarda la calibración como JSON versionado con huellas de las tablas."""
    if cal.naive:
        raise CalibrationError("La codificación nominal no se guarda como calibración")
    doc = {
        'format': 'optomvm-calibration',
        'version': CALIBRATION_FORMAT_VERSION,
        'n': cal.n,
        'dac_bits': cal.dac_bits,
        'lut_points': cal.lut_points,
        'full_scale': cal.full_scale,
        'rows': [
            {
                'row': r.row,
                'unit': r.unit,
                'gains': [float(g) for g in r.gains],
                's00': r.s00,
                'pairs': [
                    {
                        'slm_lut': [float(x) for x in p.slm_lut],
                        'pd_lut': [float(x) for x in p.pd_lut],
                        'slm_lut_sha256': _digest(p.slm_lut),
                        'pd_lut_sha256': _digest(p.pd_lut),
                        'i00': p.i00,
                        'slm_ref': _scalar(p.slm_ref),
                        'pd_ref': _scalar(p.pd_ref),
                    }
                    for p in r.pairs
                ],
            }
            for r in cal.rows
        ],
    }
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=1, sort_keys=True), encoding='utf-8')
    logger.info(f"Calibración guardada en {out}")
    return out


def load_calibration(path: str, quantizer: QuantizerSpec) -> ArrayCalibration:
    """
    Carga una calibración guardada y reconstruye las tablas de codificación.

    Raises:
        FormatError: Versión desconocida, huella no coincidente o DAC distinto
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise FormatError(f"No existe el archivo de calibración: {path}")
    try:
        doc = json.loads(file_path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise FormatError(f"Calibración ilegible: {e.msg}", offset=e.pos)

    if doc.get('format') != 'optomvm-calibration' or doc.get('version') != CALIBRATION_FORMAT_VERSION:
        raise FormatError(f"Formato de calibración no soportado: {doc.get('format')} v{doc.get('version')}")
    if doc['dac_bits'] != quantizer.dac_bits:
        raise FormatError(f"La calibración es de un DAC de {doc['dac_bits']} bits, no {quantizer.dac_bits}")

    ideal = quantizer.ideal_dac
    grid = code_grid(quantizer, doc['lut_points'])
    rows = []
    for row_doc in doc['rows']:
        tables, slm_models, pd_models = [], [], []
        for i, pair in enumerate(row_doc['pairs']):
            slm_lut = np.array(pair['slm_lut'], dtype=float)
            pd_lut = np.array(pair['pd_lut'], dtype=float)
            if _digest(slm_lut) != pair['slm_lut_sha256'] or _digest(pd_lut) != pair['pd_lut_sha256']:
                raise FormatError(f"Huella de tabla no coincide: fila {row_doc['row']}, par {i}")
            if len(slm_lut) != len(grid) or len(pd_lut) != len(grid):
                raise FormatError(f"Longitud de tabla incorrecta: fila {row_doc['row']}, par {i}")
            table, slm, pd = _build_pair(grid, slm_lut, pd_lut, pair['i00'],
                                         pair['slm_ref'], pair['pd_ref'], ideal)
            tables.append(table)
            slm_models.append(slm)
            pd_models.append(pd)
        rows.append(_assemble_row(row_doc['row'], tables, slm_models, pd_models, ideal, row_doc['s00']))

    logger.info(f"Calibración cargada desde {file_path}")
    return ArrayCalibration(rows=rows, n=doc['n'], dac_bits=doc['dac_bits'],
                            lut_points=doc['lut_points'], full_scale=doc['full_scale'])
