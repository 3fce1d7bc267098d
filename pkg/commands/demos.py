"""
Subcomandos de demostración sobre la GEMM: reconstrucción SVD de imágenes,
clasificación lineal de clusters y MLP de dos capas sobre MNIST.

Todas las demos evalúan con el backend exacto como referencia y, si se pide
el analógico, también con él para comparar.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from compute.gemm import OracleBackend
from ml.adam import AdamState
from ml.datasets import DATASETS, load_split, make_blobs, one_hot
from ml.evaluation import evaluate_model, write_confusion_csv
from ml.linear import least_squares_loss, standardize, train_linear_mse
from ml.mlp import Mlp2, train_mlp2
from ml.svd import SvdFactors, frobenius_tail, jacobi_svd, psnr, reconstruct_topk
from utils.checkpoint import load_checkpoint, save_checkpoint
from utils.config_loader import RunConfig
from utils.errors import DomainError
from utils.formatters import format_db
from utils.image_io import from_unit, load_image, save_image, synthetic_test_image, to_unit
from .common import make_backend, prepare_output, write_metrics

logger = logging.getLogger(__name__)

DEMOS = ('svd', 'blobs', 'mlp')
DEFAULT_KS = (4, 16, 32)
MNIST_CLASSES = 10


def _reconstruct(factors: List[SvdFactors], K: int, backend) -> np.ndarray:
    channels = [reconstruct_topk(f, K, backend) for f in factors]
    return channels[0] if len(channels) == 1 else np.stack(channels, axis=-1)


def cmd_demo_svd(config: RunConfig, image_path: Optional[str] = None,
                 ks: Sequence[int] = DEFAULT_KS, backend: str = 'analog',
                 calibrated: bool = True) -> Dict:
    """
    Reconstrucción top-K de una imagen PGM/PPM (o de la imagen sintética de
    64×64 si no se da ninguna). Escribe svd_k<K>.pgm|ppm y svd_metrics.json.
    """
    pixels = load_image(image_path) if image_path else synthetic_test_image()
    image = to_unit(pixels)
    out = prepare_output(config)

    planes = [image] if image.ndim == 2 else [image[:, :, c] for c in range(image.shape[2])]
    factors = [jacobi_svd(plane) for plane in planes]
    oracle = OracleBackend(config.n)
    chosen = oracle if backend == 'oracle' else make_backend(config, backend, calibrated)
    suffix = 'pgm' if image.ndim == 2 else 'ppm'

    rows = []
    for K in ks:
        exact = _reconstruct(factors, K, oracle)
        recon = exact if chosen is oracle else _reconstruct(factors, K, chosen)
        save_image(out / f'svd_k{K}.{suffix}', from_unit(recon))
        tail = float(np.sqrt(sum(frobenius_tail(f, K) ** 2 for f in factors)))
        row = {
            'k': K,
            'psnr': psnr(image, recon),
            'psnr_oracle': psnr(image, exact),
            'frobenius_tail': tail,
            'frobenius_residual': float(np.linalg.norm(image - exact)),
        }
        rows.append(row)
        logger.info(f"SVD K={K}: PSNR {format_db(row['psnr'])} ({backend})")

    metrics = {
        'config_digest': config.digest(),
        'backend': backend,
        'shape': list(image.shape),
        'reconstructions': rows,
    }
    write_metrics(out / 'svd_metrics.json', metrics)
    return metrics


def cmd_demo_blobs(config: RunConfig, backend: str = 'analog', calibrated: bool = True,
                   seeds: int = 1) -> Dict:
    """
    Clasificación por mínimos cuadrados sobre clusters gaussianos.

    Se entrena con Adam en aritmética exacta y se compara la pérdida de
    inferencia de ambos backends; con `seeds` > 1 se repite con semillas
    config.seed, config.seed + 1, ...
    """
    if seeds < 1:
        raise DomainError(f"seeds debe ser ≥ 1: {seeds}")
    out = prepare_output(config)
    oracle = OracleBackend(config.n)
    analog = make_backend(config, backend, calibrated) if backend != 'oracle' else None

    runs = []
    for offset in range(seeds):
        seed = config.seed + offset
        X, labels = make_blobs(config.blobs_k, config.blobs_n, config.blobs_spread, seed)
        X = standardize(X)
        targets = one_hot(labels, config.blobs_k)
        model = train_linear_mse(X, targets, AdamState(lr=config.lr), config.blobs_epochs)

        exact = evaluate_model(model, X, labels, oracle)
        run = {
            'seed': seed,
            'loss_oracle': exact.loss,
            'accuracy_oracle': exact.accuracy,
            'loss_closed_form': least_squares_loss(X, targets),
        }
        if analog is not None:
            measured = evaluate_model(model, X, labels, analog)
            run['loss_analog'] = measured.loss
            run['accuracy_analog'] = measured.accuracy
            run['relative_loss_gap'] = abs(measured.loss - exact.loss) / exact.loss
        runs.append(run)

    metrics = {'config_digest': config.digest(), 'backend': backend, 'runs': runs}
    if analog is not None:
        metrics['mean_relative_loss_gap'] = float(np.mean([r['relative_loss_gap'] for r in runs]))
    write_metrics(out / 'blobs_metrics.json', metrics)
    return metrics


def cmd_demo_mlp(config: RunConfig, data_dir: str, dataset: str = 'mnist',
                 backend: str = 'analog', calibrated: bool = True,
                 checkpoint_path: Optional[str] = None) -> Dict:
    """
    MLP de dos capas lineal: se entrena en aritmética exacta (o se carga de
    un checkpoint) y se evalúa en test con los backends.

    Escribe mlp_checkpoint.omck, confusion_<backend>.csv y mlp_metrics.json.
    """
    if dataset not in DATASETS:
        raise DomainError(f"Dataset desconocido: {dataset} (válidos: {', '.join(DATASETS)})")
    test = load_split(data_dir, 'test', config.test_limit)
    out = prepare_output(config)

    if checkpoint_path:
        model = Mlp2.from_params(load_checkpoint(checkpoint_path))
        logger.info(f"MLP cargado desde {checkpoint_path}")
    else:
        train = load_split(data_dir, 'train', config.train_limit)
        model = Mlp2.init(train.X.shape[1], config.hidden, MNIST_CLASSES, config.seed)
        train_mlp2(train.X, train.labels, model, AdamState(lr=config.lr),
                   config.epochs, config.batch, seed=config.seed)
    save_checkpoint(out / 'mlp_checkpoint.omck', model.params)

    backends = [OracleBackend(config.n)]
    if backend != 'oracle':
        backends.append(make_backend(config, backend, calibrated))

    metrics = {
        'config_digest': config.digest(),
        'dataset': dataset,
        'test_samples': len(test),
        'train_history': model.history,
    }
    for engine_backend in backends:
        evaluation = evaluate_model(model, test.X, test.labels, engine_backend)
        write_confusion_csv(evaluation.confusion, out / f'confusion_{engine_backend.name}.csv')
        metrics[f'accuracy_{engine_backend.name}'] = evaluation.accuracy
        metrics[f'loss_{engine_backend.name}'] = evaluation.loss
    if len(backends) > 1:
        metrics['accuracy_gap'] = metrics['accuracy_oracle'] - metrics[f'accuracy_{backend}']
    write_metrics(out / 'mlp_metrics.json', metrics)
    return metrics


def cmd_demo(kind: str, config: RunConfig, **options) -> Dict:
    """Despacha la demo por nombre ('svd', 'blobs' o 'mlp')."""
    runners = {'svd': cmd_demo_svd, 'blobs': cmd_demo_blobs, 'mlp': cmd_demo_mlp}
    if kind not in runners:
        raise DomainError(f"Demo desconocida: {kind} (válidas: {', '.join(DEMOS)})")
    return runners[kind](config, **options)
