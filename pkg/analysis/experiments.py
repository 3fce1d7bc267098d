"""
Laboratorio de error Monte Carlo.

Cada ensayo multiplica una matriz N×N y un vector aleatorios (elementos
uniformes en [−1, 1]) en el array y con la referencia exacta; el error por
elemento de salida se ajusta a una normal y su desviación típica es la
figura de mérito. Los barridos repiten el experimento a lo largo de un eje
(variación, bits del ADC o potencia de entrada).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from compute.mvm_engine import MvmEngine, engine_pool
from utils.errors import DomainError, NumericError

logger = logging.getLogger(__name__)

# Claves de sub-secuencia: entradas de cada ensayo, ruido de cada ensayo, semillas de barrido
TRIAL_STREAM = 10
TRIAL_NOISE = 11
SWEEP_STREAM = 12

HISTOGRAM_BINS = 50
TRIAL_CHUNK = 1024

SWEEP_AXES = ('variation', 'adc_bits', 'power')
SWEEP_COLUMNS = ['axis', 'value', 'mean', 'std', 'trials', 'seed']
HISTOGRAM_COLUMNS = ['bin_lo', 'bin_hi', 'count']

CSV_FLOAT_FORMAT = '%.17g'


@dataclass
class ErrorReport:
    """
    Distribución del error (analógico − exacto) de un experimento.

    Attributes:
        samples: Errores por elemento de salida (ensayos × N)
        mean, std: Ajuste normal (media y desviación típica insesgada)
        skew, excess_kurtosis: Comprobación de normalidad
        bin_edges, counts: Histograma
        config_digest: Huella de la configuración resuelta
        seed: Semilla del experimento
    """
    samples: np.ndarray
    mean: float
    std: float
    skew: float
    excess_kurtosis: float
    bin_edges: np.ndarray
    counts: np.ndarray
    config_digest: str
    seed: int
    trials: int

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def histogram_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'bin_lo': self.bin_edges[:-1],
            'bin_hi': self.bin_edges[1:],
            'count': self.counts.astype(np.int64),
        }, columns=HISTOGRAM_COLUMNS)


@dataclass
class SweepResult:
    """Filas del barrido (una por valor del eje) y sus informes."""
    axis: str
    frame: pd.DataFrame
    reports: List[ErrorReport] = field(default_factory=list)

    @property
    def stds(self) -> np.ndarray:
        return self.frame['std'].to_numpy()


def fit_gaussian(samples) -> Tuple[float, float]:
    """
    Media y desviación típica insesgada (estimador de momentos).

    Raises:
        NumericError: Con menos de dos muestras
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 2:
        raise NumericError(f"Hacen falta al menos 2 muestras, hay {samples.size}")
    return float(samples.mean()), float(samples.std(ddof=1))


def _shape_moments(samples: np.ndarray, std: float) -> Tuple[float, float]:
    if std == 0.0:
        return 0.0, 0.0
    return float(stats.skew(samples)), float(stats.kurtosis(samples, fisher=True))


def trial_inputs(seed: int, trial: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """W (N×N) y v (N,) del ensayo, de su propia sub-secuencia."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(TRIAL_STREAM, trial)))
    W = rng.uniform(-1.0, 1.0, (n, n))
    v = rng.uniform(-1.0, 1.0, n)
    return W, v


def _trial_errors(engine: MvmEngine, seed: int, trials: Sequence[int]) -> np.ndarray:
    n = engine.n
    Ws = np.empty((len(trials), n, n))
    vs = np.empty((len(trials), n))
    for idx, t in enumerate(trials):
        Ws[idx], vs[idx] = trial_inputs(seed, t, n)
    rngs = [engine.array.noise_stream(TRIAL_NOISE, t) for t in trials]
    analog = engine.mvm_batch(Ws, vs, item_rngs=rngs)
    exact = np.einsum('bij,bj->bi', Ws, vs)
    return analog - exact


def run_error_experiment(config, trials: int, seed: Optional[int] = None,
                         calibrated: bool = True,
                         engines: Optional[List[MvmEngine]] = None,
                         jobs: Optional[int] = None) -> ErrorReport:
    """
    Ejecuta `trials` multiplicaciones aleatorias y resume el error.

    El array se fabrica con la semilla del experimento. Cada ensayo toma sus
    entradas y su ruido de sub-secuencias propias, así que el resultado no
    depende del orden de los ensayos ni del número de motores.

    Args:
        config: RunConfig
        trials: Número de ensayos (≥ 1)
        seed: Semilla (por defecto config.seed)
        calibrated: False usa la codificación nominal sin corrección
        engines: Motores ya construidos para (config, seed)
        jobs: Motores en paralelo (por defecto config.jobs)

    Returns:
        ErrorReport
    """
    if trials < 1:
        raise DomainError(f"trials debe ser ≥ 1: {trials}")
    seed = config.seed if seed is None else int(seed)
    engines = engines or engine_pool(config, jobs or config.jobs, calibrated, seed=seed)

    chunks = [list(range(s, min(s + TRIAL_CHUNK, trials))) for s in range(0, trials, TRIAL_CHUNK)]
    if len(engines) == 1:
        parts = [_trial_errors(engines[0], seed, chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=len(engines)) as pool:
            futures = [pool.submit(_trial_errors, engines[i % len(engines)], seed, chunk)
                       for i, chunk in enumerate(chunks)]
            parts = [f.result() for f in futures]

    samples = np.concatenate(parts).ravel()
    mean, std = fit_gaussian(samples) if samples.size > 1 else (float(samples.mean()), 0.0)
    skew, kurt = _shape_moments(samples, std)
    counts, edges = np.histogram(samples, bins=HISTOGRAM_BINS)
    logger.info(
        f"Experimento ({trials} ensayos, semilla {seed}, "
        f"{'calibrado' if calibrated else 'sin corrección'}): media={mean:.3e}, std={std:.4e}"
    )
    return ErrorReport(
        samples=samples, mean=mean, std=std, skew=skew, excess_kurtosis=kurt,
        bin_edges=edges, counts=counts, config_digest=config.digest(), seed=seed, trials=trials,
    )


def derive_seed(seed: int, index: int) -> int:
    """Semilla del punto `index` de un barrido."""
    state = np.random.SeedSequence(seed, spawn_key=(SWEEP_STREAM, index)).generate_state(1)
    return int(state[0])


def apply_axis(config, axis: str, value):
    """Configuración del punto del barrido."""
    if axis == 'variation':
        return config.replace(variation=float(value))
    if axis == 'adc_bits':
        if float(value) != int(value):
            raise DomainError(f"adc_bits debe ser entero: {value}")
        return config.replace(adc_bits=int(value))
    if axis == 'power':
        if not value > 0:
            raise DomainError(f"El múltiplo de potencia debe ser > 0: {value}")
        return config.replace(p0=config.p0 * float(value))
    raise DomainError(f"Eje de barrido desconocido: {axis} (válidos: {', '.join(SWEEP_AXES)})")


def sweep(config, axis: str, values: Sequence, trials: int, seed: Optional[int] = None,
          calibrated: bool = True, jobs: Optional[int] = None) -> SweepResult:
    """
    Un experimento de error por valor del eje, con semillas derivadas.

    Args:
        config: Configuración base
        axis: 'variation', 'adc_bits' o 'power' (múltiplos de p0)
        values: Valores ascendentes, no vacíos
        trials: Ensayos por punto
        seed: Semilla base (por defecto config.seed)

    Returns:
        SweepResult con columnas axis, value, mean, std, trials, seed
    """
    if axis not in SWEEP_AXES:
        raise DomainError(f"Eje de barrido desconocido: {axis} (válidos: {', '.join(SWEEP_AXES)})")
    values = list(values)
    if not values:
        raise DomainError("El barrido necesita al menos un valor")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError(f"Los valores del barrido deben ser ascendentes: {values}")
    seed = config.seed if seed is None else int(seed)

    rows: List[Dict] = []
    reports: List[ErrorReport] = []
    for index, value in enumerate(values):
        point = apply_axis(config, axis, value)
        point_seed = derive_seed(seed, index)
        report = run_error_experiment(point, trials, point_seed, calibrated, jobs=jobs)
        reports.append(report)
        rows.append({
            'axis': axis,
            'value': value,
            'mean': report.mean,
            'std': report.std,
            'trials': trials,
            'seed': point_seed,
        })
        logger.info(f"Barrido {axis}={value}: std={report.std:.4e}")

    return SweepResult(axis=axis, frame=pd.DataFrame(rows, columns=SWEEP_COLUMNS), reports=reports)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Pendiente del ajuste lineal de log(y) frente a log(x)."""
    fit = stats.linregress(np.log10(np.asarray(x, dtype=float)), np.log10(np.asarray(y, dtype=float)))
    return float(fit.slope)


def write_sweep_csv(result: SweepResult, path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    result.frame.to_csv(out, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    logger.info(f"CSV del barrido escrito en {out}")
    return out


def write_histogram_csv(report: ErrorReport, path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    report.histogram_frame().to_csv(out, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    return out
