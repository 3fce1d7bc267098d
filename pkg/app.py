"""
Simulador de MVM optoelectrónica con grafeno.

Punto de entrada de línea de comandos: calibración, MVM/GEMM, barridos de
error, las demos de SVD, Blobs y MLP y la repetición de ejecuciones guardadas.

Uso:
    python app.py <subcomando> [opciones]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

# Configurar logging
logging.basicConfig(level=logging.INFO, format='%(levelname)s %(name)s: %(message)s')
logger = logging.getLogger(__name__)

# Importar módulos locales
from analysis.experiments import SWEEP_AXES
from commands import (
    cmd_calibrate,
    cmd_mvm,
    cmd_gemm,
    cmd_error_sweep,
    cmd_demo,
)
from commands.common import BACKENDS
from ml.datasets import DATASETS
from utils.config_loader import CommandRecord, ConfigLoader, RunConfig
from utils.errors import ConfigError, SimulatorError

# Flag de la CLI -> clave 'seccion.clave' de la configuración
CONFIG_FLAGS = {
    'seed': 'array.seed',
    'n': 'array.n',
    'p0': 'array.p0',
    'variation': 'device.variation',
    'dac_bits': 'quantizer.dac_bits',
    'adc_bits': 'quantizer.adc_bits',
    'sigma': 'noise.sigma',
    'jobs': 'run.jobs',
    'output_dir': 'run.output_dir',
}

# Argumentos con rutas; se guardan absolutas
PATH_ARGUMENTS = ('matrix', 'vector', 'a', 'b', 'calibration', 'image', 'data_dir', 'checkpoint')

# Ya recogidos en la configuración resuelta o sin efecto en los resultados
NOT_RECORDED = {'command', 'config', 'verbose', 'quiet', 'epochs', *CONFIG_FLAGS}

REPLAYABLE = ('calibrate', 'mvm', 'gemm', 'sweep', 'demo-svd', 'demo-blobs', 'demo-mlp')


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group('configuración')
    group.add_argument('--config', help='Archivo INI de configuración')
    group.add_argument('--seed', type=int, help='Semilla maestra (array.seed)')
    group.add_argument('--n', type=int, help='Dimensión N del array (array.n)')
    group.add_argument('--p0', type=float, help='Potencia de entrada por píxel en W (array.p0)')
    group.add_argument('--variation', type=float, help='Variación de dispositivo p ∈ [0, 1)')
    group.add_argument('--dac-bits', help="Bits del DAC de puerta o 'ideal'")
    group.add_argument('--adc-bits', help="Bits del ADC o 'ideal'")
    group.add_argument('--sigma', type=float, help='Ruido de lectura en A (noise.sigma)')
    group.add_argument('--jobs', type=int, help='Motores en paralelo (run.jobs)')
    group.add_argument('--output-dir', help='Directorio de resultados (run.output_dir)')

    _verbosity_options(common)
    return common


def _verbosity_options(parser: argparse.ArgumentParser):
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='Log en nivel DEBUG')
    verbosity.add_argument('--quiet', action='store_true', help='Solo avisos y errores')


def _engine_options(parser: argparse.ArgumentParser, calibration: bool = False):
    parser.add_argument('--naive', action='store_true',
                        help='Codificación nominal sin corrección (control de contraste)')
    if calibration:
        parser.add_argument('--calibration', help='Calibración guardada por calibrate')


def build_parser() -> argparse.ArgumentParser:
    """Parser con un subcomando por operación."""
    parser = argparse.ArgumentParser(
        prog='optomvm',
        description='Simulador de multiplicación matriz-vector optoelectrónica con grafeno',
    )
    common = _common_options()
    sub = parser.add_subparsers(dest='command', required=True, metavar='subcomando')

    sub.add_parser('calibrate', parents=[common], help='Calibra el array y guarda las tablas')

    p = sub.add_parser('mvm', parents=[common], help='Multiplica una matriz N×N por un vector')
    p.add_argument('matrix', help='Archivo de matriz')
    p.add_argument('vector', help='Archivo de vector')
    p.add_argument('--binary', action='store_true', help='Resultado en formato binario')
    _engine_options(p, calibration=True)

    p = sub.add_parser('gemm', parents=[common], help='Producto de matrices por bloques')
    p.add_argument('a', help='Archivo de la matriz A')
    p.add_argument('b', help='Archivo de la matriz B')
    p.add_argument('--backend', choices=BACKENDS, default='oracle', help='Backend de los tiles')
    p.add_argument('--binary', action='store_true', help='Resultado en formato binario')
    _engine_options(p, calibration=True)

    p = sub.add_parser('sweep', parents=[common], help='Barrido del error de la MVM')
    p.add_argument('--axis', choices=SWEEP_AXES, required=True, help='Eje del barrido')
    p.add_argument('--values', type=float, nargs='+', required=True,
                   help='Valores ascendentes (power: múltiplos de p0)')
    p.add_argument('--trials', type=int, default=10000, help='Ensayos por punto')
    p.add_argument('--excel', action='store_true', help='Exporta también a Excel')
    p.add_argument('--pdf', action='store_true', help='Exporta también un resumen en PDF')
    _engine_options(p)

    p = sub.add_parser('demo-svd', parents=[common], help='Reconstrucción SVD top-K de una imagen')
    p.add_argument('--image', help='Imagen PGM/PPM (por defecto, imagen sintética 64×64)')
    p.add_argument('--k', type=int, nargs='+', default=[4, 16, 32], help='Rangos K')
    p.add_argument('--backend', choices=BACKENDS, default='analog')
    _engine_options(p)

    p = sub.add_parser('demo-blobs', parents=[common], help='Clasificación lineal de clusters')
    p.add_argument('--backend', choices=BACKENDS, default='analog')
    p.add_argument('--seeds', type=int, default=1, help='Repeticiones con semillas consecutivas')
    p.add_argument('--epochs', type=int, help='Épocas de Adam (ml.blobs_epochs)')
    _engine_options(p)

    p = sub.add_parser('demo-mlp', parents=[common], help='MLP de dos capas sobre MNIST/Fashion-MNIST')
    p.add_argument('--data-dir', required=True, help='Directorio con los archivos IDX')
    p.add_argument('--dataset', choices=DATASETS, default='mnist')
    p.add_argument('--backend', choices=BACKENDS, default='analog')
    p.add_argument('--checkpoint', help='Checkpoint a evaluar en lugar de entrenar')
    p.add_argument('--epochs', type=int, help='Épocas de entrenamiento (ml.epochs)')
    _engine_options(p)

    p = sub.add_parser('replay', help='Repite una ejecución desde su resolved_config.ini')
    p.add_argument('resolved', help='Configuración resuelta con sección [command]')
    p.add_argument('--output-dir', help='Directorio de resultados de la repetición')
    _verbosity_options(p)
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, object]:
    """Flags de configuración presentes en la línea de comandos."""
    overrides = {key: getattr(args, flag) for flag, key in CONFIG_FLAGS.items()
                 if getattr(args, flag, None) is not None}
    epochs = getattr(args, 'epochs', None)
    if epochs is not None:
        overrides['ml.blobs_epochs' if args.command == 'demo-blobs' else 'ml.epochs'] = epochs
    return overrides


def record_command(args: argparse.Namespace) -> CommandRecord:
    """Subcomando y argumentos que no están en la configuración."""
    values = {key: value for key, value in vars(args).items() if key not in NOT_RECORDED}
    for key in PATH_ARGUMENTS:
        if values.get(key) is not None:
            values[key] = str(Path(values[key]).resolve())
    return CommandRecord.from_values(args.command, values)


def load_replay(args: argparse.Namespace) -> Tuple[RunConfig, argparse.Namespace]:
    """
    Configuración y argumentos de una ejecución guardada.

    Raises:
        ConfigError: Si el archivo no trae un subcomando repetible
    """
    config = ConfigLoader().load(args.resolved, {'run.output_dir': args.output_dir})
    command = config.command
    if command is None:
        raise ConfigError("el archivo no tiene sección [command]", 'command.name')
    if command.name not in REPLAYABLE:
        raise ConfigError(f"subcomando no repetible: {command.name}", 'command.name')
    logger.info(f"Repitiendo {command.name} desde {args.resolved}")
    return config, argparse.Namespace(command=command.name, **command.values())


def run_command(config, args: argparse.Namespace):
    calibrated = not getattr(args, 'naive', False)
    if args.command == 'calibrate':
        return cmd_calibrate(config)
    if args.command == 'mvm':
        return cmd_mvm(config, args.matrix, args.vector, args.calibration, calibrated, args.binary)
    if args.command == 'gemm':
        return cmd_gemm(config, args.a, args.b, args.backend, args.calibration, calibrated, args.binary)
    if args.command == 'sweep':
        return cmd_error_sweep(config, args.axis, args.values, args.trials, calibrated,
                               args.excel, args.pdf)
    if args.command == 'demo-svd':
        return cmd_demo('svd', config, image_path=args.image, ks=args.k,
                        backend=args.backend, calibrated=calibrated)
    if args.command == 'demo-blobs':
        return cmd_demo('blobs', config, backend=args.backend, calibrated=calibrated,
                        seeds=args.seeds)
    if args.command == 'demo-mlp':
        return cmd_demo('mlp', config, data_dir=args.data_dir, dataset=args.dataset,
                        backend=args.backend, calibrated=calibrated,
                        checkpoint_path=args.checkpoint)
    raise SimulatorError(f"Subcomando desconocido: {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    """Función principal. Devuelve el código de salida."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    try:
        if args.command == 'replay':
            config, args = load_replay(args)
        else:
            config = ConfigLoader().load(args.config, collect_overrides(args))
            config = config.with_command(record_command(args))
        run_command(config, args)

    except SimulatorError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    except Exception:
        logger.exception(f"Error inesperado en {args.command}")
        return 1

    logger.info(f"{args.command} completado; resultados en {config.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
