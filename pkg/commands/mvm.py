"""
Subcomando mvm: una multiplicación matriz-vector en el array simulado.
"""

import logging
from typing import Dict, Optional

import numpy as np

from compute.mvm_engine import build_engine, mvm_oracle
from utils.config_loader import RunConfig
from utils.matrix_io import load_matrix, load_vector, save_matrix
from .common import prepare_output, resolve_calibration, write_metrics

logger = logging.getLogger(__name__)


def cmd_mvm(config: RunConfig, matrix_path: str, vector_path: str,
            calibration_path: Optional[str] = None, calibrated: bool = True,
            binary: bool = False) -> Dict:
    """
    Multiplica la matriz por el vector y escribe output_vector.txt (o .bin)
    junto con mvm_diagnostics.json.

    Args:
        matrix_path: Archivo de matriz N×N
        vector_path: Archivo de vector de longitud N
        calibration_path: Calibración guardada (omite el barrido)
        calibrated: False usa la codificación nominal
        binary: Guarda el resultado en formato binario
    """
    W = load_matrix(matrix_path)
    v = load_vector(vector_path)
    calibration = resolve_calibration(config, calibration_path)
    out = prepare_output(config)

    engine = build_engine(config, calibrated, calibration)
    result = engine.mvm(W, v)
    reference = mvm_oracle(W, v)
    save_matrix(out / ('output_vector.bin' if binary else 'output_vector.txt'), result.output, binary)

    diagnostics = {
        'config_digest': config.digest(),
        'passes_used': result.passes_used,
        'clamp_count': result.diagnostics['clamp_count'],
        'units': result.diagnostics['units'],
        'max_abs_error': float(np.max(np.abs(result.output - reference))),
        'calibrated': calibrated,
    }
    write_metrics(out / 'mvm_diagnostics.json', diagnostics)
    return diagnostics
