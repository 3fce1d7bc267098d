"""
Esquema de configuración del simulador.

Cada clave se define con:
- type: 'int', 'float', 'bool' o 'str'
- default: Valor por defecto
- min / max: Límites inclusivos (opcionales)
- allow: Palabras reservadas aceptadas además del tipo ('ideal', 'auto')
- help: Descripción corta (se publica en el --help de la CLI)
"""

SCHEMA_VERSION = 1

CONFIG_SCHEMA = {
    'array': {
        'n': {
            'type': 'int', 'default': 8, 'min': 1,
            'help': 'Dimensión N del array N×N',
        },
        'p0': {
            'type': 'float', 'default': 1.0, 'min': 0.0,
            'help': 'Potencia óptica de entrada por píxel (W)',
        },
        'seed': {
            'type': 'int', 'default': 42, 'min': 0,
            'help': 'Semilla maestra',
        },
    },
    'device': {
        'slm_c2': {'type': 'float', 'default': 0.5, 'help': 'Transmisión: coeficiente u²'},
        'slm_c1': {'type': 'float', 'default': 0.0, 'help': 'Transmisión: coeficiente u'},
        'slm_c0': {'type': 'float', 'default': 0.25, 'help': 'Transmisión: término constante'},
        'pd_c2': {'type': 'float', 'default': -0.5, 'help': 'Responsividad: coeficiente u² (A/W)'},
        'pd_c1': {'type': 'float', 'default': 0.0, 'help': 'Responsividad: coeficiente u (A/W)'},
        'pd_c0': {'type': 'float', 'default': 0.8, 'help': 'Responsividad: término constante (A/W)'},
        'variation': {
            'type': 'float', 'default': 0.0, 'min': 0.0, 'max': 0.999999,
            'help': 'Intensidad de variación p ∈ [0, 1)',
        },
        'per_coefficient_variation': {
            'type': 'bool', 'default': False,
            'help': 'Un sorteo X por coeficiente en lugar de uno por unidad',
        },
    },
    'quantizer': {
        'dac_bits': {
            'type': 'int', 'default': 8, 'min': 1, 'max': 24, 'allow': ['ideal'],
            'help': 'Bits del DAC de puerta (o ideal)',
        },
        'adc_bits': {
            'type': 'int', 'default': 'ideal', 'min': 1, 'max': 24, 'allow': ['ideal'],
            'help': 'Bits del ADC de lectura (o ideal)',
        },
        'adc_full_scale': {
            'type': 'float', 'default': 'auto', 'min': 1e-300, 'allow': ['auto'],
            'help': 'Fondo de escala del ADC en A (o auto)',
        },
    },
    'noise': {
        'sigma': {
            'type': 'float', 'default': 0.0, 'min': 0.0,
            'help': 'Desviación típica del ruido de lectura (A)',
        },
        'enabled': {
            'type': 'bool', 'default': True,
            'help': 'Activa el ruido de lectura',
        },
    },
    'calibration': {
        'repeats': {
            'type': 'int', 'default': 16, 'min': 1,
            'help': 'Exposiciones promediadas por muestra de calibración',
        },
        'lut_points': {
            'type': 'int', 'default': 257, 'min': 3,
            'help': 'Muestras del barrido cuando el DAC es ideal',
        },
    },
    'run': {
        'jobs': {
            'type': 'int', 'default': 1, 'min': 1,
            'help': 'Motores en paralelo para gemm y barridos',
        },
        'output_dir': {
            'type': 'str', 'default': 'salida',
            'help': 'Directorio de resultados',
        },
    },
    'ml': {
        'hidden': {'type': 'int', 'default': 64, 'min': 1, 'help': 'Anchura oculta del MLP'},
        'epochs': {'type': 'int', 'default': 5, 'min': 1, 'help': 'Épocas de entrenamiento'},
        'batch': {'type': 'int', 'default': 100, 'min': 1, 'help': 'Tamaño de lote del MLP'},
        'lr': {'type': 'float', 'default': 0.1, 'min': 0.0, 'help': 'Tasa de aprendizaje de Adam'},
        'train_limit': {'type': 'int', 'default': 10000, 'min': 1, 'help': 'Muestras de entrenamiento'},
        'test_limit': {'type': 'int', 'default': 2000, 'min': 1, 'help': 'Muestras de test'},
        'blobs_k': {'type': 'int', 'default': 2, 'min': 2, 'help': 'Número de clusters Blobs'},
        'blobs_n': {'type': 'int', 'default': 100, 'min': 1, 'help': 'Puntos por cluster'},
        'blobs_spread': {'type': 'float', 'default': 1.0, 'min': 1e-12, 'help': 'Dispersión de los clusters'},
        'blobs_epochs': {'type': 'int', 'default': 500, 'min': 1, 'help': 'Épocas de Adam para Blobs'},
    },
}

# Constantes físicas fijas (no configurables)
PHYSICS = {
    'q': 1.6e-19,      # C
    'hbar': 1.05e-34,  # J·s
    'v_f': 1e6,        # m/s
}

IDEAL = 'ideal'
AUTO = 'auto'
