"""
Exportación de barridos de error a Excel y PDF.

Los dos formatos son opcionales: si falta la librería, la función devuelve
None y la CLI lo avisa en el log.
"""

import io
from datetime import datetime
from typing import List, Optional

try:
    import xlsxwriter
    XLSXWRITER_AVAILABLE = True
except ImportError:
    XLSXWRITER_AVAILABLE = False

try:
    from reportlab.lib import colors
    from reportlab.lib.pagesizes import A4, landscape
    from reportlab.lib.styles import getSampleStyleSheet
    from reportlab.lib.units import mm
    from reportlab.platypus import KeepTogether, Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle
    REPORTLAB_AVAILABLE = True
except ImportError:
    REPORTLAB_AVAILABLE = False

from .formatters import format_error, format_relative

# Fecha fija en los metadatos para que los archivos sean reproducibles
FIXED_TIMESTAMP = datetime(2000, 1, 1)

HEADER_COLOR = '#2b4c7e'
ZEBRA_COLOR = '#eef2f7'

AXIS_LABELS = {
    'variation': 'Variación p',
    'adc_bits': 'Bits del ADC',
    'power': 'Potencia (× p0)',
}


def _axis_title(result) -> str:
    return f"Barrido de error: {AXIS_LABELS.get(result.axis, result.axis)}"


def export_sweep_to_excel(result, config_digest: str) -> Optional[bytes]:
    """
    Libro con una hoja resumen y una hoja de histograma por punto.

    Args:
        result: SweepResult
        config_digest: Huella de la configuración base

    Returns:
        Bytes del .xlsx, o None sin xlsxwriter
    """
    if not XLSXWRITER_AVAILABLE:
        return None

    buffer = io.BytesIO()
    workbook = xlsxwriter.Workbook(buffer, {'in_memory': True})
    workbook.set_properties({'title': _axis_title(result), 'created': FIXED_TIMESTAMP})

    fmt = {
        'title': workbook.add_format({'bold': True, 'font_size': 13}),
        'head': workbook.add_format({'bold': True, 'font_color': 'white', 'bg_color': HEADER_COLOR,
                                     'align': 'center', 'bottom': 2}),
        'sci': workbook.add_format({'num_format': '0.000E+00'}),
        'int': workbook.add_format({'num_format': '0'}),
        'plain': workbook.add_format({}),
    }

    summary = workbook.add_worksheet('Barrido')
    summary.set_column(0, 0, 16)
    summary.set_column(1, 5, 13)
    summary.write(0, 0, _axis_title(result), fmt['title'])
    summary.write(1, 0, f'Configuración {config_digest[:16]}')
    summary.write_row(3, 0, list(result.frame.columns), fmt['head'])
    cell_formats = ['plain', 'plain', 'sci', 'sci', 'int', 'int']
    for offset, record in enumerate(result.frame.itertuples(index=False), start=4):
        for col, (value, kind) in enumerate(zip(record, cell_formats)):
            summary.write(offset, col, value if col == 0 else float(value), fmt[kind])
    summary.freeze_panes(4, 0)

    for index, report in enumerate(result.reports):
        sheet = workbook.add_worksheet(f'Histograma {index + 1}')
        sheet.set_column(0, 2, 13)
        sheet.write(0, 0, f'{result.axis} = {result.frame["value"].iloc[index]}', fmt['title'])
        sheet.write_row(2, 0, ['bin_lo', 'bin_hi', 'count'], fmt['head'])
        hist = report.histogram_frame()
        sheet.write_column(3, 0, hist['bin_lo'].astype(float).tolist(), fmt['sci'])
        sheet.write_column(3, 1, hist['bin_hi'].astype(float).tolist(), fmt['sci'])
        sheet.write_column(3, 2, hist['count'].astype(int).tolist(), fmt['int'])

    workbook.close()
    return buffer.getvalue()


def _table(rows: List[List[str]], widths: List[float]) -> 'Table':
    table = Table(rows, colWidths=widths, repeatRows=1)
    commands = [
        ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor(HEADER_COLOR)),
        ('TEXTCOLOR', (0, 0), (-1, 0), colors.white),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('FONTSIZE', (0, 0), (-1, -1), 9),
        ('ALIGN', (1, 0), (-1, -1), 'RIGHT'),
        ('LINEBELOW', (0, 0), (-1, 0), 1, colors.black),
        ('LINEBELOW', (0, -1), (-1, -1), 0.5, colors.grey),
    ]
    commands += [('BACKGROUND', (0, r), (-1, r), colors.HexColor(ZEBRA_COLOR))
                 for r in range(2, len(rows), 2)]
    table.setStyle(TableStyle(commands))
    return table


def export_sweep_to_pdf(result, config_digest: str) -> Optional[bytes]:
    """
    Resumen del barrido en PDF: tabla de desviaciones y, por punto, la
    asimetría, la curtosis y el número de muestras del ajuste normal.

    Returns:
        Bytes del PDF, o None sin reportlab
    """
    if not REPORTLAB_AVAILABLE:
        return None

    buffer = io.BytesIO()
    doc = SimpleDocTemplate(buffer, pagesize=landscape(A4), leftMargin=15 * mm, rightMargin=15 * mm,
                            topMargin=15 * mm, bottomMargin=15 * mm,
                            title=_axis_title(result), invariant=1)
    styles = getSampleStyleSheet()

    stds = result.stds
    reference = stds[0] if len(stds) else None
    rows = [[AXIS_LABELS.get(result.axis, result.axis), 'Media', 'Desv. típica', 'Frente al primero', 'Semilla']]
    for record in result.frame.itertuples(index=False):
        rows.append([str(record.value), format_error(record.mean), format_error(record.std),
                     format_relative(record.std, reference), str(record.seed)])

    shape_rows = [['Punto', 'Muestras', 'Asimetría', 'Curtosis exceso']]
    for record, report in zip(result.frame.itertuples(index=False), result.reports):
        shape_rows.append([str(record.value), str(report.count),
                           f"{report.skew:+.3f}", f"{report.excess_kurtosis:+.3f}"])

    elements = [
        Paragraph(_axis_title(result), styles['Title']),
        Paragraph(f"Configuración {config_digest[:16]}", styles['Normal']),
        Spacer(1, 6 * mm),
        KeepTogether([Paragraph("Desviación típica del error", styles['Heading2']),
                      _table(rows, [45 * mm, 40 * mm, 40 * mm, 40 * mm, 40 * mm])]),
    ]
    if result.reports:
        elements += [
            Spacer(1, 6 * mm),
            KeepTogether([Paragraph("Forma de la distribución", styles['Heading2']),
                          _table(shape_rows, [45 * mm, 35 * mm, 35 * mm, 40 * mm])]),
        ]

    doc.build(elements)
    return buffer.getvalue()


def is_excel_export_available() -> bool:
    return XLSXWRITER_AVAILABLE


def is_pdf_export_available() -> bool:
    return REPORTLAB_AVAILABLE
