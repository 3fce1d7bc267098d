import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardware.device_model import (
    CurveDiagnostics,
    CurveKind,
    DEFAULT_RESPONSIVITY,
    DEFAULT_TRANSMISSION,
    NoiseSpec,
    QuantizerSpec,
    ResponseCurve,
    VariationSpec,
    adc_convert,
    apply_variation,
    damping_to_mobility,
    dequantize_gate,
    eval_curve,
    fit_quadratic,
    quantize_gate,
    read_with_noise_and_adc,
)
from utils.errors import DomainError, NumericError

unit_values = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestEvalCurve:
    def test_default_transmission_endpoints(self):
        assert eval_curve(DEFAULT_TRANSMISSION, 0.0) == pytest.approx(0.25)
        assert eval_curve(DEFAULT_TRANSMISSION, 1.0) == pytest.approx(0.75)

    def test_default_responsivity_at_one(self):
        assert eval_curve(DEFAULT_RESPONSIVITY, 1.0) == pytest.approx(0.3)

    def test_out_of_range_code_rejected(self):
        with pytest.raises(DomainError):
            eval_curve(DEFAULT_TRANSMISSION, 1.5)
        with pytest.raises(DomainError):
            eval_curve(DEFAULT_TRANSMISSION, -0.1)

    def test_transmission_clamped_and_counted(self):
        curve = ResponseCurve(0.0, 2.0, 0.0, CurveKind.TRANSMISSION)
        diagnostics = CurveDiagnostics()
        values = eval_curve(curve, np.array([0.25, 0.75, 1.0]), diagnostics)
        np.testing.assert_allclose(values, [0.5, 1.0, 1.0])
        assert diagnostics.clamp_count == 2

    def test_responsivity_never_negative(self):
        curve = ResponseCurve(0.0, -1.0, 0.5, CurveKind.RESPONSIVITY)
        assert eval_curve(curve, 1.0) == 0.0

    @given(unit_values)
    def test_transmission_in_unit_interval(self, u):
        assert 0.0 <= eval_curve(DEFAULT_TRANSMISSION, u) <= 1.0


class TestFitQuadratic:
    def test_three_points_recover_coefficients(self):
        samples = [(u, 0.5 * u * u + 0.25) for u in (0.0, 0.5, 1.0)]
        curve, _ = fit_quadratic(samples)
        np.testing.assert_allclose(curve.coefficients, [0.5, 0.0, 0.25], atol=1e-12)

    def test_exact_family_has_no_residual(self):
        u = np.linspace(0, 1, 101)
        curve, rms = fit_quadratic(zip(u, -0.3 * u * u + 0.2 * u + 0.7))
        assert rms < 1e-12
        np.testing.assert_allclose(curve.coefficients, [-0.3, 0.2, 0.7], atol=1e-10)

    def test_perturbed_samples(self):
        rng = np.random.default_rng(0)
        u = np.linspace(0, 1, 101)
        y = 0.5 * u * u + 0.25 + rng.uniform(-1e-3, 1e-3, u.size)
        curve, _ = fit_quadratic(zip(u, y))
        np.testing.assert_allclose(curve.coefficients, [0.5, 0.0, 0.25], atol=1e-2)

    def test_rank_deficient(self):
        with pytest.raises(NumericError):
            fit_quadratic([(0.0, 1.0), (0.0, 2.0), (1.0, 3.0)])


class TestVariation:
    @pytest.mark.parametrize("x,factor", [(0.0, 1.1), (1.0, 0.9), (0.5, 1.0)])
    def test_scale_bounds(self, x, factor):
        varied = apply_variation(DEFAULT_TRANSMISSION, VariationSpec(p=0.2), x)
        np.testing.assert_allclose(varied.coefficients, DEFAULT_TRANSMISSION.coefficients * factor)

    @given(unit_values)
    def test_complementary_draws_average_to_nominal(self, x):
        spec = VariationSpec(p=0.2)
        a = apply_variation(DEFAULT_RESPONSIVITY, spec, x).coefficients
        b = apply_variation(DEFAULT_RESPONSIVITY, spec, 1.0 - x).coefficients
        np.testing.assert_allclose((a + b) / 2, DEFAULT_RESPONSIVITY.coefficients, atol=1e-15)

    @given(unit_values)
    def test_zero_variation_is_identity(self, x):
        varied = apply_variation(DEFAULT_TRANSMISSION, VariationSpec(p=0.0), x)
        np.testing.assert_array_equal(varied.coefficients, DEFAULT_TRANSMISSION.coefficients)

    def test_per_coefficient_mode_needs_three_draws(self):
        spec = VariationSpec(p=0.2, per_coefficient=True)
        with pytest.raises(DomainError):
            apply_variation(DEFAULT_TRANSMISSION, spec, 0.5)
        varied = apply_variation(DEFAULT_TRANSMISSION, spec, np.array([0.0, 0.5, 1.0]))
        np.testing.assert_allclose(varied.coefficients, [0.55, 0.0, 0.225])

    def test_p_out_of_range(self):
        with pytest.raises(DomainError):
            VariationSpec(p=1.0)


class TestMobility:
    def test_reference_value(self):
        assert damping_to_mobility(2e-3, 0.5) == pytest.approx(6562.5, rel=1e-2)

    def test_inverse_proportionality(self):
        base = damping_to_mobility(2e-3, 0.5)
        assert damping_to_mobility(4e-3, 0.5) == pytest.approx(base / 2)
        assert damping_to_mobility(2e-3, 0.25) == pytest.approx(base * 2)

    def test_nonpositive_inputs(self):
        with pytest.raises(DomainError):
            damping_to_mobility(0.0, 0.5)
        with pytest.raises(DomainError):
            damping_to_mobility(2e-3, -1.0)


class TestQuantizeGate:
    def test_tie_goes_to_lower_code(self):
        code, realized = quantize_gate(0.5, QuantizerSpec(dac_bits=8))
        assert code == 127
        assert realized == pytest.approx(127 / 255)

    @pytest.mark.parametrize("bits", [1, 4, 8, 12])
    def test_endpoints(self, bits):
        q = QuantizerSpec(dac_bits=bits)
        assert quantize_gate(0.0, q) == (0, 0.0)
        code, realized = quantize_gate(1.0, q)
        assert code == 2 ** bits - 1
        assert realized == 1.0

    @given(unit_values)
    def test_nearest_level_bound(self, u):
        q = QuantizerSpec(dac_bits=8)
        _, realized = quantize_gate(u, q)
        assert abs(realized - u) <= 1 / (2 * 255) + 1e-15

    @given(st.integers(min_value=0, max_value=255))
    def test_realized_levels_are_fixed_points(self, code):
        q = QuantizerSpec(dac_bits=8)
        u = float(dequantize_gate(code, q))
        assert quantize_gate(u, q)[0] == code

    def test_ideal_dac_passes_through(self):
        assert quantize_gate(0.37, QuantizerSpec(dac_bits=None)) == (0.37, 0.37)

    @pytest.mark.parametrize("bits", [8, None])
    @pytest.mark.parametrize("u", [-0.1, 1.2, float('nan'), [0.5, 1.0001]])
    def test_out_of_range_rejected(self, bits, u):
        with pytest.raises(DomainError):
            quantize_gate(u, QuantizerSpec(dac_bits=bits))


class TestReadout:
    def test_disabled_pipeline_is_identity(self):
        assert read_with_noise_and_adc(1.0, NoiseSpec(0.0), QuantizerSpec(adc_bits=None), None) == 1.0

    def test_one_bit_adc_tie(self):
        q = QuantizerSpec(adc_bits=1, adc_full_scale=2.0)
        assert read_with_noise_and_adc(1.0, NoiseSpec(0.0), q, None) == 0.0
        assert read_with_noise_and_adc(1.5, NoiseSpec(0.0), q, None) == 2.0

    def test_finite_adc_clamps(self):
        q = QuantizerSpec(adc_bits=8, adc_full_scale=1.0)
        np.testing.assert_allclose(adc_convert([-0.5, 3.0], q), [0.0, 1.0])

    def test_noise_moments(self):
        rng = np.random.default_rng(7)
        current = np.full(10 ** 6, 0.5)
        reads = read_with_noise_and_adc(current, NoiseSpec(0.01), QuantizerSpec(adc_bits=None), rng)
        assert abs(reads.mean() - 0.5) < 3 * 0.01 / 1000
        assert reads.std() == pytest.approx(0.01, rel=1e-2)

    def test_noise_requires_generator(self):
        with pytest.raises(DomainError):
            read_with_noise_and_adc(0.5, NoiseSpec(0.01), QuantizerSpec(adc_bits=None), None)

    @given(st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1))
    def test_adc_monotone(self, a, b):
        q = QuantizerSpec(adc_bits=6, adc_full_scale=1.0)
        lo, hi = sorted((a, b))
        assert adc_convert(lo, q) <= adc_convert(hi, q)
