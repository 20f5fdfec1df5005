"""Kernels numéricos: exponencial de matriz, ZOH, Riccati, Lyapunov, χ²."""

from .chi2 import chi2_cdf, chi2_quantile, chi2_sf
from .linalg import (
    as_matrix,
    as_symmetric_psd,
    dare_residual,
    generalized_symmetric_eig_max,
    mat_exp,
    psd_sqrt,
    solve_dare,
    solve_dlyap,
    spectral_radius,
    symmetrize,
    zoh_pair,
    zoh_process_noise,
)

__all__ = [
    'as_matrix',
    'as_symmetric_psd',
    'chi2_cdf',
    'chi2_quantile',
    'chi2_sf',
    'dare_residual',
    'generalized_symmetric_eig_max',
    'mat_exp',
    'psd_sqrt',
    'solve_dare',
    'solve_dlyap',
    'spectral_radius',
    'symmetrize',
    'zoh_pair',
    'zoh_process_noise',
]
