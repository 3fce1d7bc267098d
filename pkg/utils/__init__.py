from .errors import (
    SimulatorError,
    ConfigError,
    FormatError,
    DomainError,
    CalibrationError,
    StateError,
    NumericError,
)

__all__ = [
    'SimulatorError',
    'ConfigError',
    'FormatError',
    'DomainError',
    'CalibrationError',
    'StateError',
    'NumericError',
]
