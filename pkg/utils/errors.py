"""
Jerarquía de excepciones del simulador.

Cada excepción lleva el código de salida que usa la CLI.
"""


class SimulatorError(Exception):
    """Error base del simulador."""
    exit_code = 1


class ConfigError(SimulatorError):
    """Error de validación de la configuración (incluye la ruta del campo)."""
    exit_code = 2

    def __init__(self, message: str, field: str = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class FormatError(SimulatorError):
    """Archivo ilegible o con formato incorrecto."""
    exit_code = 3

    def __init__(self, message: str, offset: int = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte {offset})"
        super().__init__(message)


class DomainError(SimulatorError):
    """Argumento fuera de dominio."""
    exit_code = 3


class CalibrationError(SimulatorError):
    """La calibración no es válida o no pudo completarse."""
    exit_code = 4


class StateError(SimulatorError):
    """Operación sobre un array o motor sin calibrar."""
    exit_code = 4


class NumericError(SimulatorError):
    """Fallo numérico: no convergencia, divergencia, muestras insuficientes."""
    exit_code = 5
