from .experiments import (
    ErrorReport,
    SweepResult,
    fit_gaussian,
    run_error_experiment,
    sweep,
    loglog_slope,
    write_sweep_csv,
    write_histogram_csv,
)

__all__ = [
    'ErrorReport',
    'SweepResult',
    'fit_gaussian',
    'run_error_experiment',
    'sweep',
    'loglog_slope',
    'write_sweep_csv',
    'write_histogram_csv',
]
