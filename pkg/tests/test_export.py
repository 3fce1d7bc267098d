import io
import zipfile

import numpy as np
import pandas as pd
import pytest

from analysis.experiments import SWEEP_COLUMNS, ErrorReport, SweepResult
from utils.export import (
    export_sweep_to_excel,
    export_sweep_to_pdf,
    is_excel_export_available,
    is_pdf_export_available,
)
from utils.formatters import format_current, format_db, format_error, format_relative


class TestFormatters:
    @pytest.mark.parametrize("value,expected", [
        (1.25e-3, "1,250 mA"),
        (2.0, "2,000 A"),
        (-4.5e-6, "-4,500 µA"),
        (5e-7, "500,000 nA"),
    ])
    def test_current(self, value, expected):
        assert format_current(value) == expected

    def test_current_zero(self):
        assert format_current(0.0) == "0.0 A"

    @pytest.mark.parametrize("value,reference,expected", [
        (2.5e-3, 2e-3, "125,0%"),
        (1e-3, 4e-3, "25,0%"),
        (np.float64(3.0), np.float64(3.0), "100,0%"),
        (1e-3, 0.0, "-"),
        (1e-3, None, "-"),
        (float('nan'), 1e-3, "-"),
    ])
    def test_relative(self, value, reference, expected):
        assert format_relative(value, reference) == expected

    def test_error(self):
        assert format_error(0.00123) == "1,23e-03"
        assert format_error("x") == "-"

    def test_db(self):
        assert format_db(float('inf')) == "∞ dB"
        assert format_db(31.4159) == "31,42 dB"


@pytest.fixture
def sweep_result():
    rng = np.random.default_rng(0)
    reports = []
    rows = []
    for index, (value, std) in enumerate([(0.0, 1e-3), (0.2, 2e-3)]):
        samples = rng.normal(0.0, std, (10, 4))
        counts, edges = np.histogram(samples, bins=5)
        reports.append(ErrorReport(samples=samples, mean=float(samples.mean()), std=std, skew=0.0,
                                   excess_kurtosis=0.0, bin_edges=edges, counts=counts,
                                   config_digest='abc', seed=42 + index, trials=10))
        rows.append({'axis': 'variation', 'value': value, 'mean': float(samples.mean()),
                     'std': std, 'trials': 10, 'seed': 42 + index})
    return SweepResult(axis='variation', frame=pd.DataFrame(rows, columns=SWEEP_COLUMNS), reports=reports)


class TestExcel:
    def test_workbook_sheets(self, sweep_result):
        if not is_excel_export_available():
            assert export_sweep_to_excel(sweep_result, 'f' * 64) is None
            return
        content = export_sweep_to_excel(sweep_result, 'f' * 64)
        with zipfile.ZipFile(io.BytesIO(content)) as archive:
            workbook = archive.read('xl/workbook.xml').decode('utf-8')
        assert 'Barrido' in workbook
        assert 'Histograma 2' in workbook

    def test_deterministic(self, sweep_result):
        pytest.importorskip('xlsxwriter')
        assert export_sweep_to_excel(sweep_result, 'd') == export_sweep_to_excel(sweep_result, 'd')


class TestPdf:
    def test_document(self, sweep_result):
        if not is_pdf_export_available():
            assert export_sweep_to_pdf(sweep_result, 'f' * 64) is None
            return
        content = export_sweep_to_pdf(sweep_result, 'f' * 64)
        assert content.startswith(b'%PDF')

    def test_deterministic(self, sweep_result):
        pytest.importorskip('reportlab')
        assert export_sweep_to_pdf(sweep_result, 'd') == export_sweep_to_pdf(sweep_result, 'd')

    def test_zero_reference_std(self, sweep_result):
        pytest.importorskip('reportlab')
        sweep_result.frame.loc[0, 'std'] = 0.0
        assert export_sweep_to_pdf(sweep_result, 'd').startswith(b'%PDF')
