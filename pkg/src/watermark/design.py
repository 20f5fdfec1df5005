"""
Projeto da covariância do watermark 𝒬 em período fixo.

Problema (T fixo):
    max_𝒬  2·tr(Cᵀ𝒫⁻¹C𝒰)·𝒯
    s.a.   tr[(U + B_dᵀSB_d)𝒬] ≤ μ,   𝒬 ⪰ 0
           𝒰 = 𝒜𝒰𝒜ᵀ + B_d𝒬B_dᵀ

O objetivo é linear em 𝒬: tr(Cᵀ𝒫⁻¹C𝒰) = tr(M𝒬) com M = B_dᵀΦB_d e
Φ = 𝒜ᵀΦ𝒜 + Cᵀ𝒫⁻¹C. Com N = U + B_dᵀSB_d, o ótimo é de posto um:
𝒬* = μ·vvᵀ/(vᵀNv), v o autovetor generalizado dominante de (M, N).
"""
from dataclasses import dataclass

import numpy as np
from loguru import logger

from ..control import ClosedLoopDesign, CostWeights, classify_A_script
from ..exceptions import DomainError, StabilityError
from ..numerics import (
    as_symmetric_psd,
    generalized_symmetric_eig_max,
    solve_dlyap,
    symmetrize,
)
from ..plant import ContinuousPlant, DiscretePlant

DEFAULT_WINDOW = 10
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class WatermarkDesign:
    """Covariância do watermark e seus efeitos no detector e no custo."""

    cov_Q: np.ndarray
    steady_U: np.ndarray
    expected_shift: float
    cost_increase: float
    window: int

    @property
    def is_zero(self) -> bool:
        return not np.any(self.cov_Q)


# =============================================================================
# FÓRMULAS FECHADAS
# =============================================================================

def expected_shift(design: ClosedLoopDesign, steady_U: np.ndarray, window: int) -> float:
    """Deslocamento assintótico E[Δg_k] = 2·tr(Cᵀ𝒫⁻¹C𝒰)·𝒯."""
    if window < 1:
        raise DomainError(f"janela deve ser >= 1, recebido {window}")
    C = design.C
    weighted = np.linalg.solve(design.resid_cov, C @ steady_U @ C.T)
    return max(0.0, float(2.0 * np.trace(weighted) * window))


def cost_increase(
    plant: DiscretePlant, S: np.ndarray, weights: CostWeights, cov_Q: np.ndarray
) -> float:
    """Aumento do custo LQG ΔJ = tr[(U + B_dᵀSB_d)𝒬]."""
    N = weights.U + plant.B_d.T @ S @ plant.B_d
    return max(0.0, float(np.trace(N @ cov_Q)))


def steady_watermark_covariance(
    design: ClosedLoopDesign, plant: DiscretePlant, cov_Q: np.ndarray
) -> np.ndarray:
    """𝒰 = Σ 𝒜ⁱB_d𝒬B_dᵀ(𝒜ⁱ)ᵀ."""
    return solve_dlyap(design.closed_loop, symmetrize(plant.B_d @ cov_Q @ plant.B_d.T))


def detection_sensitivity(design: ClosedLoopDesign, plant: DiscretePlant) -> np.ndarray:
    """M = B_dᵀΦB_d com Φ solução da Lyapunov adjunta Φ = 𝒜ᵀΦ𝒜 + Cᵀ𝒫⁻¹C."""
    C = design.C
    info = symmetrize(C.T @ np.linalg.solve(design.resid_cov, C))
    phi = solve_dlyap(design.closed_loop.T, info)
    return as_symmetric_psd(symmetrize(plant.B_d.T @ phi @ plant.B_d), "M")


def small_T_shift_approx(
    cont: ContinuousPlant,
    design_at_T: ClosedLoopDesign,
    steady_U: np.ndarray,
    window: int,
    T: float,
) -> float:
    """Forma linearizada para T pequeno: 2·tr(CᵀR⁻¹C𝒰)·𝒯·T (usa 𝒫⁻¹ ≈ T·R⁻¹)."""
    if not (np.isfinite(T) and T > 0):
        raise DomainError(f"T deve ser > 0, recebido {T}")
    C = cont.C
    weighted = np.linalg.solve(cont.R, C @ steady_U @ C.T)
    return max(0.0, float(2.0 * np.trace(weighted) * window * T))


# =============================================================================
# PROJETO
# =============================================================================

def evaluate_watermark(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    weights: CostWeights,
    cov_Q,
    window: int = DEFAULT_WINDOW,
) -> WatermarkDesign:
    """Preenche 𝒰, E[Δg_k] e ΔJ para uma 𝒬 dada."""
    cov_Q = as_symmetric_psd(cov_Q, "cov_Q")
    if cov_Q.shape != (plant.p, plant.p):
        raise DomainError(f"cov_Q deve ser {plant.p}x{plant.p}, é {cov_Q.shape}")
    steady_U = steady_watermark_covariance(design, plant, cov_Q)
    return WatermarkDesign(
        cov_Q=cov_Q,
        steady_U=steady_U,
        expected_shift=expected_shift(design, steady_U, window),
        cost_increase=cost_increase(plant, design.S, weights, cov_Q),
        window=int(window),
    )


def zero_watermark(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    weights: CostWeights,
    window: int = DEFAULT_WINDOW,
) -> WatermarkDesign:
    """Linha de base sem watermark (𝒬 = 0)."""
    return evaluate_watermark(plant, design, weights, np.zeros((plant.p, plant.p)), window)


def scaled_watermark(
    wm: WatermarkDesign,
    factor: float,
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    weights: CostWeights,
) -> WatermarkDesign:
    """Mesma direção, covariância multiplicada por `factor` (>= 0)."""
    if factor < 0:
        raise DomainError(f"fator deve ser >= 0, recebido {factor}")
    return evaluate_watermark(plant, design, weights, wm.cov_Q * factor, wm.window)


def optimize_watermark_fixed_T(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    weights: CostWeights,
    budget_mu: float,
    window: int = DEFAULT_WINDOW,
) -> WatermarkDesign:
    """
    𝒬 ótima para T fixo sob o orçamento tr[(U + B_dᵀSB_d)𝒬] ≤ μ.

    Raises:
        StabilityError: 𝒜 instável (o detector sozinho já detecta replay)
        DomainError: μ <= 0 ou janela < 1
    """
    if not (np.isfinite(budget_mu) and budget_mu > 0):
        raise DomainError(f"orçamento μ deve ser > 0, recebido {budget_mu}")
    if window < 1:
        raise DomainError(f"janela deve ser >= 1, recebido {window}")

    verdict = classify_A_script(design)
    if not verdict.stable:
        raise StabilityError("𝒜 instável: watermark desnecessário", verdict.spectral_radius)

    M = detection_sensitivity(design, plant)
    N = as_symmetric_psd(symmetrize(weights.U + plant.B_d.T @ design.S @ plant.B_d), "N")

    if float(np.max(np.abs(M), initial=0.0)) <= DEGENERATE_TOL * (1.0 + float(np.max(np.abs(N)))):
        logger.warning(f"T={plant.T:g}: watermark não entra na malha (M ≈ 0); 𝒬* = 0")
        return zero_watermark(plant, design, weights, window)

    value, v = generalized_symmetric_eig_max(M, N)
    cov_Q = budget_mu * np.outer(v, v) / float(v @ N @ v)
    wm = evaluate_watermark(plant, design, weights, symmetrize(cov_Q), window)

    logger.debug(
        f"T={plant.T:g}: λmax={value:.6g}, E[Δg]={wm.expected_shift:.6g}, ΔJ={wm.cost_increase:.6g}"
    )
    return wm
