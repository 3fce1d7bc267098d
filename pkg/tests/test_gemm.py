import importlib

import numpy as np
import pytest

# compute/__init__ re-exports the gemm() function, shadowing the submodule attribute
gemm_module = importlib.import_module('compute.gemm')
from analysis.experiments import loglog_slope
from compute.gemm import AnalogBackend, OracleBackend, gemm, plan_blocks
from utils.config_loader import default_config
from utils.errors import DomainError, StateError


def triple_loop(A, B):
    m, k = A.shape
    n = B.shape[1]
    C = [[0.0] * n for _ in range(m)]
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for p in range(k):
                acc += A[i, p] * B[p, j]
            C[i][j] = acc
    return np.array(C)


class TestPlanBlocks:
    def test_row_padding(self):
        plan = plan_blocks(9, 8, 8, 8)
        assert plan.grid == (2, 1, 1)
        assert plan.padding == (7, 0, 0)

    def test_image_sized_operands(self):
        plan = plan_blocks(768, 512, 50, 8)
        assert plan.grid == (96, 64, 7)
        assert plan.padding == (0, 0, 6)
        assert plan.padded_shape == (768, 512, 56)
        assert plan.tile_count == 96 * 64 * 7

    def test_invalid_tile(self):
        with pytest.raises(DomainError):
            plan_blocks(4, 4, 4, 0)

    def test_empty_dimension(self):
        with pytest.raises(DomainError):
            plan_blocks(0, 4, 4, 8)


class TestOracleGemm:
    def test_identity(self, rng):
        B = rng.uniform(-1, 1, (13, 5))
        np.testing.assert_array_equal(gemm(np.eye(13), B, OracleBackend(8)), B)

    def test_square_against_triple_loop(self, rng):
        A = rng.uniform(-1, 1, (16, 16))
        B = rng.uniform(-1, 1, (16, 16))
        np.testing.assert_allclose(gemm(A, B, OracleBackend(8)), triple_loop(A, B), atol=1e-12, rtol=0)

    def test_random_shapes(self):
        rng = np.random.default_rng(606)
        for _ in range(20):
            m, k, n = rng.integers(1, 21, size=3)
            A = rng.uniform(-1, 1, (m, k))
            B = rng.uniform(-1, 1, (k, n))
            C = gemm(A, B, OracleBackend(8))
            assert C.shape == (m, n)
            np.testing.assert_allclose(C, triple_loop(A, B), atol=1e-12, rtol=0)

    @pytest.mark.parametrize("tile", [1, 3, 8])
    def test_tile_size_does_not_change_result(self, rng, tile):
        A = rng.uniform(-1, 1, (7, 10))
        B = rng.uniform(-1, 1, (10, 4))
        np.testing.assert_allclose(gemm(A, B, OracleBackend(tile)), A @ B, atol=1e-12)

    def test_narrow_panels(self, rng, monkeypatch):
        A = rng.uniform(-1, 1, (20, 12))
        B = rng.uniform(-1, 1, (12, 30))
        wide = gemm(A, B, OracleBackend(8))
        monkeypatch.setattr(gemm_module, 'PANEL_COLUMNS', 8)
        np.testing.assert_allclose(gemm(A, B, OracleBackend(8)), wide, atol=1e-14)

    def test_inner_mismatch(self):
        with pytest.raises(DomainError):
            gemm(np.ones((3, 4)), np.ones((5, 2)), OracleBackend(8))

    def test_non_finite(self):
        with pytest.raises(DomainError):
            gemm(np.array([[np.nan]]), np.ones((1, 1)), OracleBackend(8))


class TestAnalogGemm:
    def test_needs_engines(self):
        with pytest.raises(StateError):
            AnalogBackend([])

    def test_matches_reference_when_exact(self, exact_config, rng):
        backend = AnalogBackend.from_config(exact_config)
        A = rng.uniform(-1, 1, (10, 12))
        B = rng.uniform(-1, 1, (12, 5))
        np.testing.assert_allclose(gemm(A, B, backend), A @ B, atol=1e-8)

    def test_zero_padding_does_not_leak(self, exact_config):
        backend = AnalogBackend.from_config(exact_config)
        C = gemm(np.ones((3, 3)), np.ones((3, 2)), backend)
        np.testing.assert_allclose(C, np.full((3, 2), 3.0), atol=1e-9)

    def test_job_count_invariance(self):
        config = default_config(n=4, dac_bits=6, sigma=1e-3, repeats=1)
        rng = np.random.default_rng(3)
        A = rng.uniform(-1, 1, (9, 7))
        B = rng.uniform(-1, 1, (7, 6))
        single = gemm(A, B, AnalogBackend.from_config(config, jobs=1))
        pooled = gemm(A, B, AnalogBackend.from_config(config, jobs=3))
        np.testing.assert_array_equal(single, pooled)

    def test_successive_calls_draw_fresh_noise(self):
        config = default_config(n=4, dac_bits=6, sigma=1e-3, repeats=1)
        backend = AnalogBackend.from_config(config)
        A = np.eye(4)
        B = np.full((4, 2), 0.5)
        assert not np.array_equal(gemm(A, B, backend), gemm(A, B, backend))

    def test_error_variance_grows_with_inner_dimension(self):
        config = default_config(n=4, dac_bits=None, adc_bits=None, sigma=1e-3, repeats=4, lut_points=65)
        backend = AnalogBackend.from_config(config)
        rng = np.random.default_rng(7)
        inner = [8, 16, 32, 64]
        variances = []
        for k in inner:
            errors = []
            for _ in range(3):
                A = rng.choice([-1.0, 1.0], (4, k))
                B = rng.choice([-1.0, 1.0], (k, 64))
                errors.append((gemm(A, B, backend) - A @ B).ravel())
            variances.append(np.var(np.concatenate(errors)))
        assert loglog_slope(inner, variances) == pytest.approx(1.0, abs=0.15)
