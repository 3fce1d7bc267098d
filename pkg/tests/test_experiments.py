import numpy as np
import pandas as pd
import pytest

from analysis.experiments import (
    HISTOGRAM_BINS,
    HISTOGRAM_COLUMNS,
    SWEEP_COLUMNS,
    apply_axis,
    derive_seed,
    fit_gaussian,
    loglog_slope,
    run_error_experiment,
    sweep,
    trial_inputs,
    write_histogram_csv,
    write_sweep_csv,
)
from compute.mvm_engine import engine_pool
from utils.config_loader import default_config
from utils.errors import DomainError, NumericError


class TestFitGaussian:
    def test_two_points(self):
        mean, std = fit_gaussian([-1.0, 1.0])
        assert mean == 0.0
        assert std == pytest.approx(np.sqrt(2.0))

    def test_large_sample(self):
        samples = np.random.default_rng(5).normal(0.0, 0.01, 10 ** 6)
        _, std = fit_gaussian(samples)
        assert std == pytest.approx(0.01, rel=1e-2)

    def test_single_sample(self):
        with pytest.raises(NumericError):
            fit_gaussian([0.3])


def test_trial_inputs_are_independent_of_order():
    W, v = trial_inputs(7, 3, 8)
    trial_inputs(7, 0, 8)
    W2, v2 = trial_inputs(7, 3, 8)
    np.testing.assert_array_equal(W, W2)
    np.testing.assert_array_equal(v, v2)
    assert np.all(np.abs(W) <= 1.0) and np.all(np.abs(v) <= 1.0)


class TestErrorExperiment:
    def test_exact_configuration_has_no_error(self, exact_config):
        report = run_error_experiment(exact_config, trials=200)
        assert report.std < 1e-9
        assert report.count == 200 * 8
        assert report.counts.sum() == report.count
        assert len(report.bin_edges) == HISTOGRAM_BINS + 1

    def test_reproducible(self):
        config = default_config(n=4, dac_bits=6, sigma=1e-3, repeats=1)
        a = run_error_experiment(config, trials=50, seed=9)
        b = run_error_experiment(config, trials=50, seed=9)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert a.config_digest == b.config_digest

    def test_seed_changes_samples(self):
        config = default_config(n=4, dac_bits=6, sigma=1e-3, repeats=1)
        a = run_error_experiment(config, trials=20, seed=1)
        b = run_error_experiment(config, trials=20, seed=2)
        assert not np.array_equal(a.samples, b.samples)

    def test_engine_count_invariance(self):
        config = default_config(n=4, dac_bits=6, sigma=1e-3, repeats=1)
        single = run_error_experiment(config, trials=2100, seed=4, jobs=1)
        pooled = run_error_experiment(config, trials=2100, seed=4, jobs=3)
        np.testing.assert_array_equal(single.samples, pooled.samples)

    def test_prefix_trials_match(self):
        config = default_config(n=4, dac_bits=6, sigma=1e-3, repeats=1)
        engines = engine_pool(config, seed=11)
        short = run_error_experiment(config, trials=10, seed=11, engines=engines)
        long = run_error_experiment(config, trials=30, seed=11, engines=engines)
        np.testing.assert_array_equal(long.samples[:short.count], short.samples)

    def test_invalid_trials(self, exact_config):
        with pytest.raises(DomainError):
            run_error_experiment(exact_config, trials=0)

    def test_quantized_dac_has_error(self, dac8_config):
        report = run_error_experiment(dac8_config.replace(variation=0.2), trials=100)
        assert report.std > 0


class TestSweep:
    def test_unknown_axis(self, exact_config):
        with pytest.raises(DomainError, match="desconocido"):
            sweep(exact_config, 'temperature', [1.0], trials=2)

    def test_empty_values(self, exact_config):
        with pytest.raises(DomainError):
            sweep(exact_config, 'variation', [], trials=2)

    def test_values_must_ascend(self, exact_config):
        with pytest.raises(DomainError, match="ascendentes"):
            sweep(exact_config, 'variation', [0.1, 0.1], trials=2)

    def test_adc_bits_must_be_integer(self, exact_config):
        with pytest.raises(DomainError):
            apply_axis(exact_config, 'adc_bits', 6.5)

    def test_power_is_multiple_of_p0(self, exact_config):
        assert apply_axis(exact_config.replace(p0=2.0), 'power', 10).p0 == 20.0

    def test_nonpositive_power(self, exact_config):
        with pytest.raises(DomainError):
            apply_axis(exact_config, 'power', 0.0)

    def test_derived_seeds(self):
        assert derive_seed(42, 0) == derive_seed(42, 0)
        assert derive_seed(42, 0) != derive_seed(42, 1)

    def test_frame_and_csv(self, small_config, tmp_path):
        result = sweep(small_config, 'variation', [0.0, 0.2], trials=20)
        assert list(result.frame.columns) == SWEEP_COLUMNS
        assert list(result.frame['value']) == [0.0, 0.2]
        assert list(result.frame['seed']) == [derive_seed(small_config.seed, i) for i in range(2)]
        assert len(result.reports) == 2

        path = write_sweep_csv(result, tmp_path / 'sweep.csv')
        assert path.read_text().splitlines()[0] == ','.join(SWEEP_COLUMNS)
        frame = pd.read_csv(path)
        np.testing.assert_array_equal(frame['std'].to_numpy(), result.stds)

        hist = write_histogram_csv(result.reports[1], tmp_path / 'hist.csv')
        assert hist.read_text().splitlines()[0] == ','.join(HISTOGRAM_COLUMNS)
        assert pd.read_csv(hist)['count'].sum() == 20 * 4

    def test_adc_resolution_dominates(self):
        config = default_config(n=4, dac_bits=None, sigma=0.0, repeats=1, lut_points=33)
        result = sweep(config, 'adc_bits', [5, 10], trials=200)
        assert result.stds[0] > 4 * result.stds[1]

    def test_power_scaling(self):
        config = default_config(n=4, dac_bits=None, sigma=1e-4, repeats=1, lut_points=33)
        values = [1.0, 10.0, 100.0, 1000.0]
        result = sweep(config, 'power', values, trials=300)
        assert loglog_slope(values, result.stds) == pytest.approx(-1.0, abs=0.1)


def test_loglog_slope():
    x = np.array([1.0, 10.0, 100.0])
    assert loglog_slope(x, 3.0 / x) == pytest.approx(-1.0)


@pytest.mark.slow
class TestAcceptance:
    def test_error_distribution_is_centered_and_normal(self, dac8_config):
        report = run_error_experiment(dac8_config.replace(variation=0.2), trials=10000)
        assert abs(report.mean) < 3 * report.std / np.sqrt(report.count)
        assert abs(report.skew) < 0.1
        assert abs(report.excess_kurtosis) < 0.3

    def test_flat_error_under_variation(self, dac8_config):
        result = sweep(dac8_config, 'variation', [0.0, 0.05, 0.1, 0.15, 0.2], trials=10000)
        assert result.stds.max() / result.stds.min() < 1.2

    def test_naive_encoding_contrast(self, dac8_config):
        config = dac8_config.replace(variation=0.2)
        calibrated = run_error_experiment(config, trials=10000)
        naive = run_error_experiment(config, trials=10000, calibrated=False)
        assert naive.std >= 5 * calibrated.std

    def test_adc_curve_is_monotone(self):
        config = default_config(dac_bits=None, sigma=0.0, repeats=1, lut_points=33)
        result = sweep(config, 'adc_bits', list(range(5, 13)), trials=10000)
        assert np.all(np.diff(result.stds) <= 0)
        assert result.stds[0] > 4 * result.stds[5]

    def test_power_curve_over_four_decades(self):
        config = default_config(dac_bits=None, sigma=1e-4, lut_points=33)
        values = [1.0, 10.0, 100.0, 1000.0, 10000.0]
        result = sweep(config, 'power', values, trials=10000)
        assert loglog_slope(values, result.stds) == pytest.approx(-1.0, abs=0.1)
        assert np.all(np.diff(result.stds) <= 0)
