"""
Subcomando sweep: barrido del error frente a variación, bits del ADC o
potencia de entrada.
"""

import logging
from typing import Dict, Sequence

from analysis.experiments import loglog_slope, sweep, write_histogram_csv, write_sweep_csv
from utils.config_loader import RunConfig
from utils.export import export_sweep_to_excel, export_sweep_to_pdf
from .common import prepare_output, write_metrics

logger = logging.getLogger(__name__)


def cmd_error_sweep(config: RunConfig, axis: str, values: Sequence, trials: int,
                    calibrated: bool = True, excel: bool = False, pdf: bool = False) -> Dict:
    """
    Ejecuta el barrido y escribe:
        sweep_<eje>.csv, histogram_<eje>_<i>.csv por punto,
        sweep_metrics.json y, opcionalmente, sweep_<eje>.xlsx / .pdf
    """
    out = prepare_output(config)
    result = sweep(config, axis, values, trials, calibrated=calibrated)
    write_sweep_csv(result, out / f'sweep_{axis}.csv')
    for index, report in enumerate(result.reports):
        write_histogram_csv(report, out / f'histogram_{axis}_{index}.csv')

    digest = config.digest()
    if excel:
        content = export_sweep_to_excel(result, digest)
        if content is None:
            logger.warning("xlsxwriter no está instalado; se omite el Excel")
        else:
            (out / f'sweep_{axis}.xlsx').write_bytes(content)
    if pdf:
        content = export_sweep_to_pdf(result, digest)
        if content is None:
            logger.warning("reportlab no está instalado; se omite el PDF")
        else:
            (out / f'sweep_{axis}.pdf').write_bytes(content)

    stds = result.stds
    metrics = {
        'config_digest': digest,
        'axis': axis,
        'values': [float(v) for v in result.frame['value']],
        'std': [float(s) for s in stds],
        'skew': [r.skew for r in result.reports],
        'excess_kurtosis': [r.excess_kurtosis for r in result.reports],
        'calibrated': calibrated,
    }
    if axis == 'power' and len(stds) > 1 and (stds > 0).all():
        metrics['loglog_slope'] = loglog_slope(result.frame['value'], stds)
    write_metrics(out / 'sweep_metrics.json', metrics)
    return metrics
