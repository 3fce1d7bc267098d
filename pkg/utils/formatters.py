"""
Funciones de formateo para informes y logs.
"""

import math

_SI_PREFIXES = [
    (1e0, ''),
    (1e-3, 'm'),
    (1e-6, 'µ'),
    (1e-9, 'n'),
    (1e-12, 'p'),
    (1e-15, 'f'),
]


def format_current(value: float, decimals: int = 3) -> str:
    """
    Formatea una corriente con prefijo SI.

    Args:
        value: Corriente en amperios
        decimals: Número de decimales

    Returns:
        String formateado (ej: "1,250 mA")
    """
    try:
        if value == 0 or not math.isfinite(value):
            return f"{value} A"
        magnitude = abs(value)
        for factor, prefix in _SI_PREFIXES:
            if magnitude >= factor:
                break
        formatted = f"{value / factor:.{decimals}f}".replace(".", ",")
        return f"{formatted} {prefix}A"
    except (ValueError, TypeError):
        return "0 A"


def format_relative(value: float, reference: float, decimals: int = 1) -> str:
    """
    Cociente value/reference como porcentaje (ej: "125,0%").

    Devuelve "-" si la referencia es nula o alguno de los dos no es finito.
    """
    try:
        value = float(value)
        reference = float(reference)
    except (ValueError, TypeError):
        return "-"
    if reference == 0 or not (math.isfinite(value) and math.isfinite(reference)):
        return "-"
    return f"{100.0 * value / reference:.{decimals}f}%".replace(".", ",")


def format_error(value: float, digits: int = 3) -> str:
    """Notación científica para desviaciones y errores (ej: "1,23e-03")."""
    try:
        return f"{value:.{digits - 1}e}".replace(".", ",")
    except (ValueError, TypeError):
        return "-"


def format_db(value: float, decimals: int = 2) -> str:
    if math.isinf(value):
        return "∞ dB"
    return f"{value:.{decimals}f} dB".replace(".", ",")
