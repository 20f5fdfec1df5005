"""
Plantas LTI estocásticas em tempo contínuo e sua discretização ZOH.

    ẋ(t) = A x(t) + B u(t) + w(t),   E[w(t)wᵀ(s)] = Q δ(t−s)
    y(t) = C x(t) + v(t),            E[v(t)vᵀ(s)] = R δ(t−s)

Após ZOH com período T:

    x_{k+1} = A_d x_k + B_d u_k + w_k,   w_k ~ N(0, Q_d)
    y_k     = C x_k + v_k,               v_k ~ N(0, R_d),  R_d = R/T
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from loguru import logger

from ..exceptions import DimensionError, DomainError
from ..numerics import (
    as_matrix,
    as_symmetric_psd,
    psd_sqrt,
    zoh_pair,
    zoh_process_noise,
)


@dataclass(frozen=True, eq=False)
class ContinuousPlant:
    """Matrizes (A, B, C) e densidades espectrais (Q, R) da planta contínua."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        """Normaliza os arrays e valida as dimensões."""
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        C = as_matrix(self.C, "C")
        Q = as_symmetric_psd(self.Q, "Q", clip=False)
        R = as_symmetric_psd(self.R, "R", clip=False)

        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A não quadrada: {A.shape}")
        if B.shape[0] != n:
            raise DimensionError(f"B deve ter {n} linhas, tem {B.shape[0]}")
        if C.shape[1] != n:
            raise DimensionError(f"C deve ter {n} colunas, tem {C.shape[1]}")
        if Q.shape != (n, n):
            raise DimensionError(f"Q deve ser {n}x{n}, é {Q.shape}")
        m = C.shape[0]
        if R.shape != (m, m):
            raise DimensionError(f"R deve ser {m}x{m}, é {R.shape}")
        if np.linalg.eigvalsh(R).min() <= 0.0:
            raise DomainError("R deve ser definida positiva")

        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        """Serializa como listas aninhadas (formato do arquivo de cenário)."""
        return {key: getattr(self, key).tolist() for key in ("A", "B", "C", "Q", "R")}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ContinuousPlant":
        return cls(A=data["A"], B=data["B"], C=data["C"], Q=data["Q"], R=data["R"])


@dataclass(frozen=True, eq=False)
class DiscretePlant:
    """Imagem ZOH (A_d, B_d, C, Q_d, R_d) de uma planta contínua no período T."""

    A_d: np.ndarray
    B_d: np.ndarray
    C: np.ndarray
    Q_d: np.ndarray
    R_d: np.ndarray
    T: float

    def __post_init__(self):
        if not (np.isfinite(self.T) and self.T > 0):
            raise DomainError(f"T deve ser > 0, recebido {self.T}")
        A_d = as_matrix(self.A_d, "A_d")
        B_d = as_matrix(self.B_d, "B_d")
        C = as_matrix(self.C, "C")
        Q_d = as_symmetric_psd(self.Q_d, "Q_d")
        R_d = as_symmetric_psd(self.R_d, "R_d", clip=False)

        n = A_d.shape[0]
        if A_d.shape != (n, n) or B_d.shape[0] != n or C.shape[1] != n or Q_d.shape != (n, n):
            raise DimensionError(
                f"dimensões incompatíveis: A_d{A_d.shape} B_d{B_d.shape} C{C.shape} Q_d{Q_d.shape}"
            )
        if R_d.shape != (C.shape[0], C.shape[0]):
            raise DimensionError(f"R_d deve ser {C.shape[0]}x{C.shape[0]}, é {R_d.shape}")
        if np.linalg.eigvalsh(R_d).min() <= 0.0:
            raise DomainError("R_d deve ser definida positiva")

        object.__setattr__(self, "A_d", A_d)
        object.__setattr__(self, "B_d", B_d)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Q_d", Q_d)
        object.__setattr__(self, "R_d", R_d)
        object.__setattr__(self, "T", float(self.T))

    @property
    def n(self) -> int:
        return self.A_d.shape[0]

    @property
    def p(self) -> int:
        return self.B_d.shape[1]

    @property
    def m(self) -> int:
        return self.C.shape[0]


def discretize(plant: ContinuousPlant, T: float) -> DiscretePlant:
    """
    Discretiza a planta com Zero-Order Hold no período T.

    A_d, B_d via exponencial em blocos; Q_d pelo método de Van Loan;
    R_d = R/T (aproximação do delta de Dirac por pulsos de largura T).
    """
    if not (np.isfinite(T) and T > 0):
        raise DomainError(f"período de amostragem deve ser > 0, recebido {T}")

    A_d, B_d = zoh_pair(plant.A, plant.B, T)
    Q_d = zoh_process_noise(plant.A, plant.Q, T)
    R_d = plant.R / T

    logger.debug(f"Planta discretizada: n={plant.n}, p={plant.p}, m={plant.m}, T={T}")
    return DiscretePlant(A_d=A_d, B_d=B_d, C=plant.C, Q_d=Q_d, R_d=R_d, T=T)


def scalar_plant(a: float, b: float, c: float, q: float, r: float) -> ContinuousPlant:
    """Planta de um estado (exemplos fechados e testes)."""
    return ContinuousPlant(A=[[a]], B=[[b]], C=[[c]], Q=[[q]], R=[[r]])


def continuous_oracle_step(
    plant: ContinuousPlant,
    x: Sequence[float],
    u_held: Sequence[float],
    T: float,
    substeps: int,
    noise_draws: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """
    Integra ẋ = Ax + Bu + w em [0, T] com u constante, em `substeps` passos.

    Em cada subpasso de largura h = T/substeps o ruído é constante por partes
    com covariância Q/h; o passo é exato (exponencial de matriz) dado o ruído.
    Serve apenas como oráculo de validação da discretização.

    Args:
        plant: planta contínua
        x: estado inicial (n,)
        u_held: entrada mantida (p,)
        T: duração
        substeps: número de subpassos (>= 1)
        noise_draws: normais padrão com substeps·n valores; None = sem ruído

    Returns:
        Estado em t = T
    """
    if substeps < 1:
        raise DomainError(f"substeps deve ser >= 1, recebido {substeps}")
    if not (np.isfinite(T) and T > 0):
        raise DomainError(f"T deve ser > 0, recebido {T}")

    n, p = plant.n, plant.p
    state = np.asarray(x, dtype=float).reshape(n)
    u = np.asarray(u_held, dtype=float).reshape(p)
    h = T / substeps

    # Um único ZOH com entrada aumentada [u, w]: Γ = ∫₀ʰ e^{As} ds · [B, I]
    A_h, gamma = zoh_pair(plant.A, np.hstack([plant.B, np.eye(n)]), h)
    gamma_u, gamma_w = gamma[:, :p], gamma[:, p:]

    if noise_draws is None:
        draws = np.zeros((substeps, n))
    else:
        draws = np.asarray(noise_draws, dtype=float)
        if draws.size != substeps * n:
            raise DimensionError(f"noise_draws deve ter {substeps * n} valores, tem {draws.size}")
        draws = draws.reshape(substeps, n)

    noise_root = psd_sqrt(plant.Q / h)
    drive = gamma_u @ u
    for j in range(substeps):
        state = A_h @ state + drive + gamma_w @ (noise_root @ draws[j])

    return state
