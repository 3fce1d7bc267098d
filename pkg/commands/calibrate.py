"""
Subcomando calibrate: fabrica el array de la configuración, lo calibra y
guarda las tablas para reutilizarlas en mvm y gemm.
"""

import logging
from typing import Dict

from compute.mvm_engine import build_engine
from hardware.calibration import save_calibration
from utils.config_loader import RunConfig
from utils.formatters import format_current
from .common import prepare_output, write_metrics

logger = logging.getLogger(__name__)

CALIBRATION_NAME = 'calibration.json'


def cmd_calibrate(config: RunConfig) -> Dict:
    """
    Calibra el array y escribe calibration.json y calibrate_metrics.json.

    Returns:
        Métricas de la calibración
    """
    out = prepare_output(config)
    engine = build_engine(config, calibrated=True)
    cal = engine.calibration
    save_calibration(cal, str(out / CALIBRATION_NAME))

    units = cal.units
    metrics = {
        'config_digest': config.digest(),
        'n': cal.n,
        'unit_min': float(units.min()),
        'unit_max': float(units.max()),
        'full_scale': cal.full_scale,
        'clamp_count': engine.array.diagnostics.clamp_count,
        's00': cal.s00,
    }
    write_metrics(out / 'calibrate_metrics.json', metrics)
    logger.info(f"Array {cal.n}×{cal.n} calibrado: unidad mínima {format_current(float(units.min()))}")
    return metrics
