import numpy as np
import pytest
from scipy import stats

from hardware.array_sim import Plane, build_array, expose_and_read, set_codes
from hardware.device_model import CurveKind, eval_coefficients, read_with_noise_and_adc
from utils.config_loader import default_config
from utils.errors import DomainError


def test_zero_variation_gives_nominal_curves():
    config = default_config(variation=0.0)
    array = build_array(config)
    for plane, nominal in ((Plane.SLM, config.slm_curve()), (Plane.PD, config.pd_curve())):
        np.testing.assert_array_equal(array.curve(plane, 3, 5).coefficients, nominal.coefficients)


def test_build_is_deterministic():
    config = default_config(variation=0.2, seed=42)
    a = build_array(config)
    b = build_array(config)
    np.testing.assert_array_equal(a.slm_coefficients, b.slm_coefficients)
    np.testing.assert_array_equal(a.pd_coefficients, b.pd_coefficients)


def test_different_seeds_differ():
    config = default_config(variation=0.2)
    assert not np.array_equal(build_array(config, 1).slm_coefficients,
                              build_array(config, 2).slm_coefficients)


def test_scale_factors_uniform():
    config = default_config(variation=0.2, n=8)
    factors = []
    for seed in range(200):
        array = build_array(config, seed)
        factors.append(array.slm_coefficients[..., 2].ravel() / config.slm_c0)
    factors = np.concatenate(factors)
    assert factors.min() >= 0.9 - 1e-12 and factors.max() <= 1.1 + 1e-12
    result = stats.kstest(factors, stats.uniform(loc=0.9, scale=0.2).cdf)
    assert result.pvalue > 0.001


def test_coefficients_frozen():
    array = build_array(default_config())
    with pytest.raises(ValueError):
        array.slm_coefficients[0, 0, 0] = 1.0


class TestSetCodes:
    def test_boundary_codes(self):
        array = build_array(default_config(dac_bits=8))
        zeros = np.zeros((8, 8), dtype=int)
        set_codes(array, zeros, zeros)
        top = np.full((8, 8), 255)
        set_codes(array, top, top)
        np.testing.assert_array_equal(array.slm_codes, top)

    def test_out_of_range_names_cell(self):
        array = build_array(default_config(dac_bits=8))
        codes = np.zeros((8, 8), dtype=int)
        codes[2, 5] = 256
        with pytest.raises(DomainError, match=r"plano=PD, j=2, i=5"):
            set_codes(array, np.zeros((8, 8), dtype=int), codes)

    def test_no_readout_side_effect(self):
        array = build_array(default_config())
        before = array.pass_count
        set_codes(array, np.zeros((8, 8), dtype=int), np.zeros((8, 8), dtype=int))
        assert array.pass_count == before


class TestExposure:
    def test_single_product(self):
        config = default_config(n=1, p0=1.0, dac_bits=None, adc_bits=None, sigma=0.0,
                                slm_c2=0.0, slm_c1=0.0, slm_c0=0.5,
                                pd_c2=0.0, pd_c1=0.0, pd_c0=0.4)
        array = build_array(config)
        readout = expose_and_read(array)
        np.testing.assert_allclose(readout.values, [0.2])

    def test_no_light_reads_zero(self):
        array = build_array(default_config(p0=0.0, sigma=0.0, adc_bits=None))
        assert np.all(expose_and_read(array).values == 0.0)

    def test_matches_direct_summation(self):
        config = default_config(variation=0.2, sigma=0.0, adc_bits=None, dac_bits=8)
        array = build_array(config)
        codes = np.full((8, 8), 100)
        set_codes(array, codes, codes)
        u = 100 / 255
        expected = np.zeros(8)
        for j in range(8):
            for i in range(8):
                t = array.curve(Plane.SLM, j, i).eval(u)
                r = array.curve(Plane.PD, j, i).eval(u)
                expected[j] += config.p0 * t * r
        np.testing.assert_allclose(expose_and_read(array).values, expected, rtol=1e-13)

    def test_linear_in_power(self):
        base = default_config(variation=0.2, sigma=0.0, adc_bits=None)
        codes = np.random.default_rng(0).integers(0, 256, (8, 8))
        reads = []
        for p0 in (1.0, 2.0):
            array = build_array(base.replace(p0=p0))
            set_codes(array, codes, codes)
            reads.append(expose_and_read(array).values)
        np.testing.assert_allclose(reads[1], 2 * reads[0], rtol=1e-14)

    def test_row_independence(self):
        array = build_array(default_config(variation=0.2, sigma=0.0, adc_bits=None))
        codes = np.full((8, 8), 50)
        set_codes(array, codes, codes)
        before = expose_and_read(array).values
        codes = codes.copy()
        codes[3] = 200
        set_codes(array, codes, np.full((8, 8), 50))
        after = expose_and_read(array).values
        changed = np.flatnonzero(before != after)
        np.testing.assert_array_equal(changed, [3])

    def test_separability(self):
        array = build_array(default_config(variation=0.2, sigma=0.0, adc_bits=None))
        base = np.zeros((8, 8), dtype=int)
        slm = base.copy()
        pd = base.copy()
        slm[1, 4] = 255
        pd[1, 4] = 255
        reads = array.expose_batch(np.stack([slm, slm, base, base]), np.stack([pd, base, pd, base]))
        combo = reads[0, 1] - reads[1, 1] - reads[2, 1] + reads[3, 1]
        t = array.curve(Plane.SLM, 1, 4)
        r = array.curve(Plane.PD, 1, 4)
        expected = array.p0 * (t.eval(1.0) - t.eval(0.0)) * (r.eval(1.0) - r.eval(0.0))
        assert combo == pytest.approx(expected, rel=1e-10)

    def test_one_noise_draw_per_row(self):
        config = default_config(sigma=1e-3, adc_bits=None)
        array = build_array(config)
        reads = array.expose_batch(np.zeros((2000, 8, 8), dtype=int), np.zeros((2000, 8, 8), dtype=int))
        clean = build_array(config.replace(sigma=0.0)).expose_batch(
            np.zeros((8, 8), dtype=int), np.zeros((8, 8), dtype=int))
        assert (reads - clean).std() == pytest.approx(1e-3, rel=0.05)

    def test_finite_adc_bounds_readout(self):
        array = build_array(default_config(adc_bits=6, sigma=0.05))
        top = np.full((8, 8), 255)
        reads = array.expose_batch(np.stack([top] * 50), np.stack([top] * 50))
        assert reads.min() >= 0.0 and reads.max() <= array.full_scale

    def test_ideal_adc_keeps_negative_noisy_reads(self):
        array = build_array(default_config(adc_bits=None, sigma=10.0))
        reads = array.expose_batch(np.zeros((50, 8, 8), dtype=int), np.zeros((50, 8, 8), dtype=int))
        assert reads.min() < 0.0

    def test_item_streams_follow_readout_pipeline(self, rng):
        array = build_array(default_config(adc_bits=8, sigma=1e-3, variation=0.1))
        slm = rng.integers(0, 256, (3, 8, 8))
        pd = rng.integers(0, 256, (3, 8, 8))
        reads = array.expose_batch(slm, pd, item_rngs=[np.random.default_rng(s) for s in range(3)])
        expected = [read_with_noise_and_adc(array.row_currents(slm[b], pd[b]), array.noise,
                                            array.quantizer, np.random.default_rng(b), array.full_scale)
                    for b in range(3)]
        np.testing.assert_array_equal(reads, np.stack(expected))

    def test_item_stream_count_must_match_batch(self):
        array = build_array(default_config(sigma=1e-3))
        codes = np.zeros((3, 8, 8), dtype=int)
        with pytest.raises(DomainError):
            array.expose_batch(codes, codes, item_rngs=[np.random.default_rng(0)])

    def test_eval_coefficients_agrees_with_curve(self):
        array = build_array(default_config(variation=0.3))
        values, _ = eval_coefficients(array.slm_coefficients, 0.4, CurveKind.TRANSMISSION)
        assert values[2, 6] == pytest.approx(array.curve(Plane.SLM, 2, 6).eval(0.4))
