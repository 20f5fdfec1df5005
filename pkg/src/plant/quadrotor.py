"""
Modelo linearizado do quadrotor em hover.

Estado (12):  x = [ṗx, px, ṗy, py, ṗz, pz, φ̇, φ, θ̇, θ, ψ̇, ψ]
Entrada (4):  u = [F, τφ, τθ, τψ]   (F = desvio do empuxo de hover m·g)
Saída (4):    y = [px, py, pz, ψ]

Convenção de sinais (fixa, documentada em docs/WATERMARK_DESIGN.md):
    p̈x = +g·θ,   p̈y = −g·φ,   p̈z = −F/m
    φ̈ = τφ/Jx,   θ̈ = τθ/Jy,   ψ̈ = τψ/Jz
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import DimensionError
from .continuous import ContinuousPlant

# Índices do vetor de estado
VX, PX, VY, PY, VZ, PZ, DPHI, PHI, DTHETA, THETA, DPSI, PSI = range(12)
OUTPUT_STATES = (PX, PY, PZ, PSI)

DEFAULT_PROCESS_DENSITY = 1e-3
DEFAULT_MEASUREMENT_DENSITY = 1e-2


class QuadrotorParams(BaseModel):
    """Parâmetros físicos do quadrotor (SI)."""

    model_config = ConfigDict(frozen=True)

    mass: float = Field(0.6, gt=0, description="Massa [kg]")
    J_x: float = Field(0.0092, gt=0, description="Inércia em x [kg·m²]")
    J_y: float = Field(0.0092, gt=0, description="Inércia em y [kg·m²]")
    J_z: float = Field(0.0101, gt=0, description="Inércia em z [kg·m²]")
    gravity: float = Field(9.81, gt=0, description="Gravidade [m/s²]")


def default_noise_densities():
    """Q = 10⁻³·I₁₂, R = 10⁻²·I₄."""
    return DEFAULT_PROCESS_DENSITY * np.eye(12), DEFAULT_MEASUREMENT_DENSITY * np.eye(4)


def quadrotor_hover_plant(
    params: Optional[QuadrotorParams] = None,
    Q=None,
    R=None,
) -> ContinuousPlant:
    """
    Constrói a linearização em hover com 12 estados.

    Args:
        params: parâmetros físicos (default: valores de referência)
        Q: densidade do ruído de processo 12x12 (default 10⁻³·I)
        R: densidade do ruído de medição 4x4 (default 10⁻²·I)

    Raises:
        DimensionError: Q ou R com forma errada
    """
    params = params or QuadrotorParams()
    default_Q, default_R = default_noise_densities()
    Q = default_Q if Q is None else np.asarray(Q, dtype=float)
    R = default_R if R is None else np.asarray(R, dtype=float)
    if Q.shape != (12, 12):
        raise DimensionError(f"Q do quadrotor deve ser 12x12, é {Q.shape}")
    if R.shape != (4, 4):
        raise DimensionError(f"R do quadrotor deve ser 4x4, é {R.shape}")

    g = params.gravity
    A = np.zeros((12, 12))
    # Posições integram velocidades, ângulos integram taxas
    for rate, position in ((VX, PX), (VY, PY), (VZ, PZ), (DPHI, PHI), (DTHETA, THETA), (DPSI, PSI)):
        A[position, rate] = 1.0
    # Inclinação gera aceleração lateral
    A[VX, THETA] = g
    A[VY, PHI] = -g

    B = np.zeros((12, 4))
    B[VZ, 0] = -1.0 / params.mass
    B[DPHI, 1] = 1.0 / params.J_x
    B[DTHETA, 2] = 1.0 / params.J_y
    B[DPSI, 3] = 1.0 / params.J_z

    C = np.zeros((4, 12))
    for row, state in enumerate(OUTPUT_STATES):
        C[row, state] = 1.0

    return ContinuousPlant(A=A, B=B, C=C, Q=Q, R=R)
