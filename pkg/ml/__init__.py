from .svd import SvdFactors, jacobi_svd, reconstruct_topk, reconstruct_image, psnr
from .datasets import make_blobs, one_hot, load_split
from .adam import AdamState
from .linear import LinearModel, train_linear_mse, least_squares_loss, standardize
from .mlp import Mlp2, train_mlp2
from .evaluation import Evaluation, evaluate_model, confusion_matrix, write_confusion_csv

__all__ = [
    'SvdFactors',
    'jacobi_svd',
    'reconstruct_topk',
    'reconstruct_image',
    'psnr',
    'make_blobs',
    'one_hot',
    'load_split',
    'AdamState',
    'LinearModel',
    'train_linear_mse',
    'least_squares_loss',
    'standardize',
    'Mlp2',
    'train_mlp2',
    'Evaluation',
    'evaluate_model',
    'confusion_matrix',
    'write_confusion_csv',
]
