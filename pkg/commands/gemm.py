"""
Subcomando gemm: producto de matrices de forma arbitraria por bloques.
"""

import logging
from typing import Dict, Optional

import numpy as np

from compute.gemm import gemm, plan_blocks
from utils.config_loader import RunConfig
from utils.matrix_io import load_matrix, save_matrix
from .common import make_backend, prepare_output, resolve_calibration, write_metrics

logger = logging.getLogger(__name__)


def cmd_gemm(config: RunConfig, a_path: str, b_path: str, backend: str = 'oracle',
             calibration_path: Optional[str] = None, calibrated: bool = True,
             binary: bool = False) -> Dict:
    """Escribe C = A·B en C.txt (o C.bin) y gemm_metrics.json."""
    A = load_matrix(a_path)
    B = load_matrix(b_path)
    calibration = resolve_calibration(config, calibration_path) if backend == 'analog' else None
    out = prepare_output(config)

    engine_backend = make_backend(config, backend, calibrated, calibration)
    C = gemm(A, B, engine_backend)
    save_matrix(out / ('C.bin' if binary else 'C.txt'), C, binary)

    plan = plan_blocks(A.shape[0], A.shape[1], B.shape[1], config.n)
    metrics = {
        'config_digest': config.digest(),
        'backend': backend,
        'shape': [A.shape[0], A.shape[1], B.shape[1]],
        'grid': list(plan.grid),
        'padding': list(plan.padding),
        'max_abs_deviation': float(np.max(np.abs(C - A @ B))),
    }
    write_metrics(out / 'gemm_metrics.json', metrics)
    return metrics
