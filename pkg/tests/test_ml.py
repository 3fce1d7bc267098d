import gzip
import struct

import numpy as np
import pandas as pd
import pytest

from compute.gemm import AnalogBackend, OracleBackend, gemm
from ml.adam import AdamState
from ml.datasets import load_split, make_blobs, one_hot
from ml.evaluation import confusion_matrix, evaluate_model, write_confusion_csv
from ml.linear import LinearModel, least_squares_loss, standardize, train_linear_mse
from ml.mlp import Mlp2, nll_loss, train_mlp2
from utils.errors import DomainError, FormatError


def write_idx(path, values, gz=False):
    values = np.asarray(values, dtype=np.uint8)
    header = bytes([0, 0, 0x08, values.ndim]) + struct.pack(f'>{values.ndim}I', *values.shape)
    raw = header + values.tobytes()
    path.write_bytes(gzip.compress(raw) if gz else raw)


class TestBlobs:
    def test_shapes_and_labels(self):
        X, labels = make_blobs(3, 20, 1.0, seed=5)
        assert X.shape == (60, 2)
        np.testing.assert_array_equal(np.bincount(labels), [20, 20, 20])

    def test_deterministic(self):
        a = make_blobs(2, 10, 0.5, seed=1)
        b = make_blobs(2, 10, 0.5, seed=1)
        np.testing.assert_array_equal(a[0], b[0])

    def test_zero_spread_collapses_to_centers(self):
        X, labels = make_blobs(2, 5, 0.0, seed=3)
        assert np.all(X[labels == 0] == X[0])

    @pytest.mark.parametrize("k,spread,n_per", [(1, 1.0, 5), (2, -1.0, 5), (2, 1.0, 0)])
    def test_invalid(self, k, spread, n_per):
        with pytest.raises(DomainError):
            make_blobs(k, n_per, spread, seed=0)


def test_one_hot():
    np.testing.assert_array_equal(one_hot([1, 0], 3), [[0, 1, 0], [1, 0, 0]])
    with pytest.raises(DomainError):
        one_hot([3], 3)


class TestIdxDatasets:
    @pytest.fixture
    def idx_dir(self, tmp_path, rng):
        images = rng.integers(0, 256, (6, 4, 4))
        labels = np.arange(6) % 10
        write_idx(tmp_path / 'train-images-idx3-ubyte', images)
        write_idx(tmp_path / 'train-labels-idx1-ubyte.gz', labels, gz=True)
        return tmp_path, images, labels

    def test_load_split(self, idx_dir):
        directory, images, labels = idx_dir
        split = load_split(directory, 'train')
        assert len(split) == 6
        assert split.X.shape == (6, 16)
        np.testing.assert_allclose(split.X, images.reshape(6, 16) / 255.0)
        np.testing.assert_array_equal(split.labels, labels)

    def test_limit(self, idx_dir):
        directory, _, _ = idx_dir
        assert len(load_split(directory, 'train', limit=4)) == 4

    def test_missing_split_files(self, idx_dir):
        directory, _, _ = idx_dir
        with pytest.raises(FormatError):
            load_split(directory, 'test')

    def test_unknown_split(self, idx_dir):
        with pytest.raises(DomainError):
            load_split(idx_dir[0], 'validation')

    def test_count_mismatch(self, tmp_path):
        write_idx(tmp_path / 'train-images-idx3-ubyte', np.zeros((3, 2, 2)))
        write_idx(tmp_path / 'train-labels-idx1-ubyte', np.zeros(2))
        with pytest.raises(FormatError):
            load_split(tmp_path, 'train')

    def test_flat_images_rejected(self, tmp_path):
        write_idx(tmp_path / 'train-images-idx3-ubyte', np.zeros((3, 4)))
        write_idx(tmp_path / 'train-labels-idx1-ubyte', np.zeros(3))
        with pytest.raises(FormatError, match="2 dimensiones"):
            load_split(tmp_path, 'train')

    def test_labels_must_be_one_dimensional(self, tmp_path):
        write_idx(tmp_path / 'train-images-idx3-ubyte', np.zeros((3, 2, 2)))
        write_idx(tmp_path / 'train-labels-idx1-ubyte', np.zeros((3, 1)))
        with pytest.raises(FormatError, match="se esperaban 1"):
            load_split(tmp_path, 'train')


class TestAdam:
    def test_first_step_has_size_lr(self):
        params = {'x': np.array([1.0, -2.0])}
        AdamState(lr=0.1).step(params, {'x': np.array([5.0, -0.01])})
        np.testing.assert_allclose(params['x'], [0.9, -1.9], atol=1e-5)

    def test_minimizes_quadratic(self):
        params = {'x': np.array([10.0])}
        adam = AdamState(lr=0.1)
        for _ in range(2000):
            adam.step(params, {'x': 2.0 * (params['x'] - 3.0)})
        assert params['x'][0] == pytest.approx(3.0, abs=1e-2)
        assert adam.step_count == 2000

    def test_weight_decay_pulls_to_zero(self):
        params = {'x': np.array([1.0])}
        AdamState(lr=0.1, weight_decay=1.0).step(params, {'x': np.array([0.0])})
        assert params['x'][0] < 1.0


class TestLinear:
    def test_recovers_slope(self):
        x = np.linspace(-1, 1, 50)[:, None]
        model = train_linear_mse(x, 2.0 * x, AdamState(lr=0.01), epochs=5000)
        assert model.W[0, 0] == pytest.approx(2.0, abs=1e-3)
        assert model.b[0] == pytest.approx(0.0, abs=1e-3)

    def test_blobs_reach_least_squares_loss(self):
        X, labels = make_blobs(2, 100, 1.0, seed=42)
        X = standardize(X)
        targets = one_hot(labels, 2)
        model = train_linear_mse(X, targets, AdamState(lr=0.01), epochs=5000)
        assert model.history[-1] - least_squares_loss(X, targets) < 1e-6
        assert len(model.history) == 5001

    def test_standardize(self, rng):
        X = standardize(rng.normal(5.0, 3.0, (100, 3)))
        np.testing.assert_allclose(X.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(X.std(axis=0), 1.0)

    def test_constant_feature_is_centered(self):
        X = standardize(np.array([[2.0], [2.0]]))
        np.testing.assert_array_equal(X, 0.0)

    def test_forward_with_gemm(self, rng):
        model = LinearModel(W=rng.standard_normal((3, 2)), b=rng.standard_normal(2))
        X = rng.standard_normal((7, 3))
        routed = model.forward(X, matmul=lambda A, B: gemm(A, B, OracleBackend(8)))
        np.testing.assert_allclose(routed, model.forward(X), atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            train_linear_mse(np.ones((4, 2)), np.ones(3), AdamState(), epochs=1)


class TestMlp:
    def test_gradients_match_finite_differences(self, rng):
        model = Mlp2.init(6, 4, 3, seed=2)
        X = rng.standard_normal((5, 6))
        labels = np.array([0, 2, 1, 1, 0])
        _, grads = model.loss_and_grads(X, labels)
        eps = 1e-5
        for name, param in model.params.items():
            numeric = np.zeros_like(param)
            for idx in np.ndindex(param.shape):
                saved = param[idx]
                param[idx] = saved + eps
                up = nll_loss(model.forward(X), labels)
                param[idx] = saved - eps
                down = nll_loss(model.forward(X), labels)
                param[idx] = saved
                numeric[idx] = (up - down) / (2 * eps)
            scale = np.maximum(np.abs(numeric) + np.abs(grads[name]), 1e-3)
            assert np.max(np.abs(numeric - grads[name]) / scale) < 1e-5, name

    def test_init_limits(self):
        model = Mlp2.init(16, 4, 3, seed=0)
        assert np.abs(model.W1).max() <= 0.25
        assert np.abs(model.W2).max() <= 0.5
        assert model.dims == (16, 4, 3)

    def test_training_reduces_loss(self):
        X, labels = make_blobs(3, 30, 0.5, seed=8)
        X = standardize(X)
        model = train_mlp2(X, labels, Mlp2.init(2, 8, 3, seed=1), AdamState(lr=0.05),
                           epochs=20, batch=10)
        assert len(model.history) == 20
        assert model.history[-1] < model.history[0]

    def test_training_is_reproducible(self):
        X, labels = make_blobs(2, 20, 0.5, seed=8)
        runs = [train_mlp2(X, labels, Mlp2.init(2, 4, 2, seed=1), AdamState(lr=0.05),
                           epochs=3, batch=7, seed=4) for _ in range(2)]
        np.testing.assert_array_equal(runs[0].W1, runs[1].W1)

    def test_invalid_labels(self):
        with pytest.raises(DomainError):
            train_mlp2(np.ones((2, 2)), [0, 5], Mlp2.init(2, 2, 3, seed=0), AdamState(), 1, 1)

    def test_from_params_checks_names(self):
        params = Mlp2.init(3, 2, 2, seed=0).params
        del params['b2']
        with pytest.raises(DomainError):
            Mlp2.from_params(params)

    def test_from_params_checks_shapes(self):
        params = dict(Mlp2.init(3, 2, 2, seed=0).params)
        params['b1'] = np.zeros(5)
        with pytest.raises(DomainError):
            Mlp2.from_params(params)


class TestEvaluation:
    def test_confusion_matrix(self):
        confusion = confusion_matrix([0, 1, 1, 2], [0, 1, 2, 2], 3)
        np.testing.assert_array_equal(confusion, [[1, 0, 0], [0, 1, 1], [0, 0, 1]])

    def test_linear_model_on_separated_clusters(self, rng):
        labels = np.repeat([0, 1], 50)
        X = np.where(labels[:, None] == 0, -3.0, 3.0) * np.array([1.0, 0.0])
        X = standardize(X + 0.3 * rng.standard_normal((100, 2)))
        model = train_linear_mse(X, one_hot(labels, 2), AdamState(lr=0.05), epochs=300)
        result = evaluate_model(model, X, labels, OracleBackend(8))
        assert result.accuracy == 1.0
        assert result.confusion.sum() == 100

    def test_analog_matches_oracle_on_exact_array(self, exact_config):
        X, labels = make_blobs(3, 10, 0.5, seed=3)
        model = Mlp2.init(2, 5, 3, seed=0)
        oracle = evaluate_model(model, X, labels, OracleBackend(8))
        analog = evaluate_model(model, X, labels, AnalogBackend.from_config(exact_config))
        np.testing.assert_allclose(analog.outputs, oracle.outputs, atol=1e-8)
        np.testing.assert_array_equal(analog.predictions, oracle.predictions)

    def test_sample_count_mismatch(self):
        with pytest.raises(DomainError):
            evaluate_model(LinearModel.zeros(2, 2), np.ones((3, 2)), [0, 1], OracleBackend(8))

    def test_unsupported_model(self):
        with pytest.raises(DomainError):
            evaluate_model(object(), np.ones((1, 1)), [0], OracleBackend(8))

    def test_confusion_csv(self, tmp_path):
        path = write_confusion_csv(np.eye(3, dtype=int), tmp_path / 'confusion.csv')
        frame = pd.read_csv(path, index_col='real')
        assert list(frame.columns) == ['pred_0', 'pred_1', 'pred_2']
        np.testing.assert_array_equal(frame.to_numpy(), np.eye(3))


@pytest.mark.slow
def test_mnist_subset_accuracy_gap(mnist_dir, dac8_config):
    train = load_split(mnist_dir, 'train', limit=10000)
    test = load_split(mnist_dir, 'test', limit=2000)
    model = train_mlp2(train.X, train.labels, Mlp2.init(784, 64, 10, seed=0), AdamState(lr=1e-3),
                       epochs=5, batch=100)
    oracle = evaluate_model(model, test.X, test.labels, OracleBackend(8))
    analog = evaluate_model(model, test.X, test.labels,
                            AnalogBackend.from_config(dac8_config.replace(variation=0.2)))
    assert oracle.accuracy >= 0.85
    assert oracle.accuracy - analog.accuracy <= 0.08
