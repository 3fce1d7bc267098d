from .device_model import (
    CurveKind,
    ResponseCurve,
    VariationSpec,
    QuantizerSpec,
    NoiseSpec,
    eval_curve,
    fit_quadratic,
    apply_variation,
    damping_to_mobility,
    quantize_gate,
    read_with_noise_and_adc,
)
from .array_sim import ArrayInstance, Plane, RowReadout, build_array, set_codes, expose_and_read
from .calibration import (
    ArrayCalibration,
    RowCalibration,
    calibrate_row,
    calibrate_array,
    nominal_calibration,
    encode_pair,
    decode_row,
    save_calibration,
    load_calibration,
)

__all__ = [
    'CurveKind',
    'ResponseCurve',
    'VariationSpec',
    'QuantizerSpec',
    'NoiseSpec',
    'eval_curve',
    'fit_quadratic',
    'apply_variation',
    'damping_to_mobility',
    'quantize_gate',
    'read_with_noise_and_adc',
    'ArrayInstance',
    'Plane',
    'RowReadout',
    'build_array',
    'set_codes',
    'expose_and_read',
    'ArrayCalibration',
    'RowCalibration',
    'calibrate_row',
    'calibrate_array',
    'nominal_calibration',
    'encode_pair',
    'decode_row',
    'save_calibration',
    'load_calibration',
]
