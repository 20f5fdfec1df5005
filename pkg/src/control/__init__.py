"""Filtro de Kalman em regime e controlador LQG."""

from .lqg import (
    ClosedLoopDesign,
    CostWeights,
    StabilityVerdict,
    assemble_closed_loop,
    classify_A_script,
    filtered_error_covariance,
    kalman_steady,
    lqg_gain,
    synthesize,
)

__all__ = [
    'ClosedLoopDesign',
    'CostWeights',
    'StabilityVerdict',
    'assemble_closed_loop',
    'classify_A_script',
    'filtered_error_covariance',
    'kalman_steady',
    'lqg_gain',
    'synthesize',
]
