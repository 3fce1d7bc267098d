"""
Utilidades compartidas por los subcomandos: directorio de salida,
configuración resuelta, archivo de métricas y selección de backend.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from compute.gemm import AnalogBackend, OracleBackend
from hardware.calibration import ArrayCalibration, load_calibration
from utils.config_loader import ConfigLoader, RunConfig
from utils.errors import DomainError

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = 'resolved_config.ini'
BACKENDS = ('oracle', 'analog')


def prepare_output(config: RunConfig) -> Path:
    """Crea el directorio de salida y deja en él la configuración resuelta."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ConfigLoader().write_resolved(config, str(out / RESOLVED_CONFIG_NAME))
    return out


def _plain(value: Any):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"No serializable: {type(value).__name__}")


def write_metrics(path: Path, metrics: Dict[str, Any]) -> Path:
    """JSON con claves ordenadas; mismo contenido, mismos bytes."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(metrics, indent=2, sort_keys=True, default=_plain) + '\n',
                    encoding='utf-8')
    logger.info(f"Métricas escritas en {path}")
    return path


def resolve_calibration(config: RunConfig, path: Optional[str]) -> Optional[ArrayCalibration]:
    if path is None:
        return None
    calibration = load_calibration(path, config.quantizer())
    if calibration.n != config.n:
        raise DomainError(f"La calibración es de N={calibration.n}, la configuración de N={config.n}")
    return calibration


def make_backend(config: RunConfig, name: str, calibrated: bool = True,
                 calibration: Optional[ArrayCalibration] = None):
    """
    Backend de GEMM por nombre.

    Args:
        name: 'oracle' o 'analog'
        calibrated: False usa la codificación nominal (solo analog)
        calibration: Calibración cargada a reutilizar (solo analog)
    """
    if name == 'oracle':
        return OracleBackend(config.n)
    if name == 'analog':
        return AnalogBackend.from_config(config, calibrated, calibration)
    raise DomainError(f"Backend desconocido: {name} (válidos: {', '.join(BACKENDS)})")
