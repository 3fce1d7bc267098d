import os

import numpy as np
import pytest

from compute.mvm_engine import build_engine
from utils.config_loader import default_config


@pytest.fixture
def exact_config():
    """Array 8×8 sin variación, sin ruido, DAC y ADC ideales."""
    return default_config(dac_bits=None, adc_bits=None, sigma=0.0, repeats=1, lut_points=33)


@pytest.fixture
def dac8_config():
    """DAC de 8 bits, ADC ideal, sin ruido."""
    return default_config(dac_bits=8, adc_bits=None, sigma=0.0, repeats=1)


@pytest.fixture
def small_config():
    """Array 4×4 de 6 bits para pruebas rápidas."""
    return default_config(n=4, dac_bits=6, adc_bits=None, sigma=0.0, repeats=1)


@pytest.fixture
def exact_engine(exact_config):
    return build_engine(exact_config)


@pytest.fixture
def small_engine(small_config):
    return build_engine(small_config)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def mnist_dir():
    path = os.environ.get('OPTOMVM_MNIST_DIR')
    if not path:
        pytest.skip("OPTOMVM_MNIST_DIR no está definido")
    return path
