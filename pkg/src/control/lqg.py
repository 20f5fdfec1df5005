"""
Síntese do filtro de Kalman em regime e do controlador LQG.

Filtro (ganho fixo, inicializado com Σ = P):
    x̂_{k|k}   = x̂_{k|k-1} + K (y_k − C x̂_{k|k-1})
    x̂_{k+1|k} = A_d x̂_{k|k} + B_d u_k

Controle:
    u_k = L x̂_{k|k},   L = −(B_dᵀ S B_d + U)⁻¹ B_dᵀ S A_d

Malha fechada relevante ao detector:
    𝒜 = (A_d + B_d L)(I − K C)
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from ..exceptions import DimensionError, DomainError
from ..numerics import (
    as_matrix,
    as_symmetric_psd,
    solve_dare,
    solve_dlyap,
    spectral_radius,
    symmetrize,
)
from ..plant import DiscretePlant
from ..runtime import get_runtime_config


@dataclass(frozen=True, eq=False)
class CostWeights:
    """Pesos do custo LQG: W (n×n, PSD) no estado, U (p×p, PD) na entrada."""

    W: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        W = as_symmetric_psd(self.W, "W", clip=False)
        U = as_symmetric_psd(self.U, "U", clip=False)
        if U.size and np.linalg.eigvalsh(U).min() <= 0.0:
            raise DomainError("U deve ser definida positiva")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "U", U)

    def check_against(self, n: int, p: int) -> None:
        if self.W.shape != (n, n) or self.U.shape != (p, p):
            raise DimensionError(
                f"pesos incompatíveis com a planta: W{self.W.shape} (esperado {(n, n)}), "
                f"U{self.U.shape} (esperado {(p, p)})"
            )


@dataclass(frozen=True, eq=False)
class ClosedLoopDesign:
    """Ganhos e grandezas de regime da malha fechada (C copiada da planta)."""

    K: np.ndarray
    P: np.ndarray
    L: np.ndarray
    S: np.ndarray
    resid_cov: np.ndarray
    closed_loop: np.ndarray
    nominal_cost: float
    C: np.ndarray

    @property
    def resid_cov_inv(self) -> np.ndarray:
        return np.linalg.inv(self.resid_cov)


@dataclass(frozen=True)
class StabilityVerdict:
    """Classificação de 𝒜: estável (replay invisível sem watermark) ou instável."""

    stable: bool
    spectral_radius: float

    @property
    def label(self) -> str:
        return "stable" if self.stable else "unstable"


# =============================================================================
# SÍNTESE
# =============================================================================

def kalman_steady(
    plant: DiscretePlant, max_iter: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Filtro de Kalman em regime.

    P é a solução estabilizante da Riccati do filtro (DARE com Aᵀ, Cᵀ),
    𝒫 = CPCᵀ + R_d e K = PCᵀ𝒫⁻¹.

    Returns:
        (K, P, resid_cov)
    """
    max_iter = max_iter or get_runtime_config().dare_max_iter
    P = solve_dare(plant.A_d.T, plant.C.T, plant.Q_d, plant.R_d, max_iter=max_iter)
    resid_cov = as_symmetric_psd(symmetrize(plant.C @ P @ plant.C.T + plant.R_d), "resid_cov")
    # K = P Cᵀ 𝒫⁻¹  <=>  Kᵀ = 𝒫⁻¹ C P
    K = as_matrix(np.linalg.solve(resid_cov, plant.C @ P).T, "K")
    return K, P, resid_cov


def lqg_gain(
    plant: DiscretePlant, weights: "CostWeights", max_iter: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ganho LQG L e solução S da Riccati de controle.

    Returns:
        (L, S)
    """
    weights.check_against(plant.n, plant.p)
    max_iter = max_iter or get_runtime_config().dare_max_iter
    S = solve_dare(plant.A_d, plant.B_d, weights.W, weights.U, max_iter=max_iter)
    B_d = plant.B_d
    L = -np.linalg.solve(B_d.T @ S @ B_d + weights.U, B_d.T @ S @ plant.A_d)
    return as_matrix(L, "L"), S


def filtered_error_covariance(plant: DiscretePlant, K: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Covariância do erro filtrado x − x̂_{k|k}: P − KCP."""
    return as_symmetric_psd(symmetrize(P - K @ plant.C @ P), "P_filtered")


def assemble_closed_loop(
    plant: DiscretePlant,
    K: np.ndarray,
    P: np.ndarray,
    L: np.ndarray,
    S: np.ndarray,
    weights: "CostWeights",
) -> ClosedLoopDesign:
    """
    Monta 𝒜, 𝒫 e o custo nominal J.

    J = tr(W(Σ + P_f)) + tr(U L Σ Lᵀ), onde P_f = P − KCP é o erro filtrado
    (ortogonal à estimativa) e Σ resolve Σ = (A_d+B_dL)Σ(A_d+B_dL)ᵀ + K𝒫Kᵀ,
    a covariância de regime de x̂_{k|k}.
    """
    n, p, m = plant.n, plant.p, plant.m
    if K.shape != (n, m) or P.shape != (n, n) or L.shape != (p, n) or S.shape != (n, n):
        raise DimensionError(
            f"ganhos incompatíveis: K{K.shape} P{P.shape} L{L.shape} S{S.shape}"
        )
    weights.check_against(n, p)

    resid_cov = as_symmetric_psd(symmetrize(plant.C @ P @ plant.C.T + plant.R_d), "resid_cov")
    control_loop = plant.A_d + plant.B_d @ L
    closed_loop = control_loop @ (np.eye(n) - K @ plant.C)

    estimate_cov = solve_dlyap(control_loop, symmetrize(K @ resid_cov @ K.T))
    P_f = filtered_error_covariance(plant, K, P)
    nominal_cost = float(
        np.trace(weights.W @ (estimate_cov + P_f)) + np.trace(weights.U @ L @ estimate_cov @ L.T)
    )

    return ClosedLoopDesign(
        K=as_matrix(K, "K"),
        P=as_symmetric_psd(P, "P"),
        L=as_matrix(L, "L"),
        S=as_symmetric_psd(S, "S"),
        resid_cov=resid_cov,
        closed_loop=as_matrix(closed_loop, "closed_loop"),
        nominal_cost=nominal_cost,
        C=plant.C,
    )


def classify_A_script(design: ClosedLoopDesign) -> StabilityVerdict:
    """Raio espectral de 𝒜 e classificação com limiar estrito 1."""
    rho = spectral_radius(design.closed_loop)
    return StabilityVerdict(stable=rho < 1.0, spectral_radius=rho)


def synthesize(plant: DiscretePlant, weights: "CostWeights") -> ClosedLoopDesign:
    """Filtro + controlador + montagem, na ordem."""
    K, P, _ = kalman_steady(plant)
    L, S = lqg_gain(plant, weights)
    design = assemble_closed_loop(plant, K, P, L, S, weights)
    verdict = classify_A_script(design)
    logger.debug(
        f"Síntese T={plant.T:g}: J={design.nominal_cost:.6g}, "
        f"ρ(𝒜)={verdict.spectral_radius:.4f} ({verdict.label})"
    )
    return design
