"""Projeto do watermark: deslocamento esperado, custo, otimização e varredura em T."""

from .design import (
    DEFAULT_WINDOW,
    WatermarkDesign,
    cost_increase,
    detection_sensitivity,
    evaluate_watermark,
    expected_shift,
    optimize_watermark_fixed_T,
    scaled_watermark,
    small_T_shift_approx,
    steady_watermark_covariance,
    zero_watermark,
)
from .sweep import (
    STATUS_OK,
    STATUS_UNNECESSARY,
    SweepResult,
    SweepRow,
    evaluate_period,
    golden_section_refine,
    sweep_sampling_period,
)

__all__ = [
    'DEFAULT_WINDOW',
    'STATUS_OK',
    'STATUS_UNNECESSARY',
    'SweepResult',
    'SweepRow',
    'WatermarkDesign',
    'cost_increase',
    'detection_sensitivity',
    'evaluate_period',
    'evaluate_watermark',
    'expected_shift',
    'golden_section_refine',
    'optimize_watermark_fixed_T',
    'scaled_watermark',
    'small_T_shift_approx',
    'steady_watermark_covariance',
    'sweep_sampling_period',
    'zero_watermark',
]
