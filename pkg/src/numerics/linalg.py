"""
Kernels de álgebra linear densa usados por todo o pipeline.

Todas as funções são puras: recebem arrays numpy, devolvem arrays novos
marcados como somente leitura. Convenções:

- Matrix: ndarray float64 2-D com entradas finitas
- SymmetricPSDMatrix: Matrix quadrada, simétrica e semidefinida positiva
"""
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from scipy import linalg as sla

from ..exceptions import (
    ConditioningError,
    ConvergenceError,
    DimensionError,
    DomainError,
    StabilityError,
)

SYMMETRY_TOL = 1e-10
EIGEN_FLOOR = 1e-10
DARE_TOL = 1e-10
DLYAP_TOL = 1e-10
STABILITY_MARGIN = 1e-9
DEFAULT_DARE_MAX_ITER = 100_000


# =============================================================================
# TIPOS DE DOMÍNIO
# =============================================================================

def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """
    Converte `value` em Matrix (float64 2-D, finita, imutável).

    Escalares viram matrizes 1x1. Vetores 1-D são rejeitados para evitar
    ambiguidade linha/coluna.
    """
    arr = np.array(value, dtype=float, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name}: esperado array 2-D, recebido ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: contém NaN/Inf")
    return _freeze(arr)


def require_square(M: np.ndarray, name: str = "matrix") -> int:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name}: matriz não quadrada {M.shape}")
    return M.shape[0]


def symmetrize(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.T)


def as_symmetric_psd(value, name: str = "matrix", clip: bool = True) -> np.ndarray:
    """
    Converte `value` em SymmetricPSDMatrix.

    Args:
        value: matriz (ou escalar)
        name: nome usado nas mensagens de erro
        clip: se True, autovalores abaixo do piso relativo são zerados com
              warning; se False, geram DomainError

    Returns:
        Matriz simetrizada, somente leitura
    """
    M = np.array(as_matrix(value, name))
    require_square(M, name)

    scale = float(np.max(np.abs(M))) if M.size else 0.0
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > SYMMETRY_TOL * max(scale, 1e-300) and asym > 0.0:
        raise DomainError(f"{name}: não simétrica (assimetria={asym:.3e})")

    M = symmetrize(M)
    if M.size == 0:
        return _freeze(M)

    eigvals, eigvecs = np.linalg.eigh(M)
    largest = float(np.max(np.abs(eigvals)))
    floor = -EIGEN_FLOOR * largest
    if eigvals.min() < floor:
        if not clip:
            raise DomainError(
                f"{name}: não é semidefinida positiva (menor autovalor={eigvals.min():.3e})"
            )
        logger.warning(
            f"{name}: autovalor {eigvals.min():.3e} abaixo do piso {floor:.3e}; recortando para 0"
        )
        eigvals = np.clip(eigvals, 0.0, None)
        M = symmetrize((eigvecs * eigvals) @ eigvecs.T)

    return _freeze(M)


def spectral_radius(M: np.ndarray) -> float:
    """Maior módulo de autovalor de uma matriz quadrada."""
    require_square(M, "M")
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def psd_sqrt(X: np.ndarray) -> np.ndarray:
    """Raiz quadrada simétrica de uma matriz PSD (via decomposição espectral)."""
    eigvals, eigvecs = np.linalg.eigh(symmetrize(np.asarray(X, dtype=float)))
    root = np.sqrt(np.clip(eigvals, 0.0, None))
    return (eigvecs * root) @ eigvecs.T


# =============================================================================
# EXPONENCIAL DE MATRIZ E ZOH
# =============================================================================

def mat_exp(M, scale: float = 1.0) -> np.ndarray:
    """
    Calcula e^{M·scale} (scaling-and-squaring com aproximante de Padé).

    Raises:
        DimensionError: M não quadrada
        DomainError: scale não finito
    """
    M = as_matrix(M, "M")
    require_square(M, "M")
    if not np.isfinite(scale):
        raise DomainError(f"scale não finito: {scale}")
    return _freeze(sla.expm(M * float(scale)))


def zoh_pair(A, B, T: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Discretização exata (A_d, B_d) sob Zero-Order Hold.

    Exponencia a matriz em blocos [[A, B], [0, 0]]·T e lê os blocos
    superiores: A_d = e^{AT}, B_d = ∫₀ᵀ e^{As} ds · B.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    n = require_square(A, "A")
    if B.shape[0] != n:
        raise DimensionError(f"B tem {B.shape[0]} linhas, esperado {n}")
    if not (np.isfinite(T) and T > 0):
        raise DomainError(f"período de amostragem deve ser > 0, recebido {T}")

    p = B.shape[1]
    block = np.zeros((n + p, n + p))
    block[:n, :n] = A
    block[:n, n:] = B
    E = sla.expm(block * T)
    return _freeze(E[:n, :n].copy()), _freeze(E[:n, n:].copy())


def zoh_process_noise(A, Q, T: float) -> np.ndarray:
    """
    Covariância discreta Q_d = ∫₀ᵀ e^{As} Q e^{Aᵀs} ds (método de Van Loan).

    Exponencia [[-A, Q], [0, Aᵀ]]·T; com E12 o bloco superior direito e
    E22 o inferior direito, Q_d = E22ᵀ E12.
    """
    A = as_matrix(A, "A")
    Q = as_symmetric_psd(Q, "Q")
    n = require_square(A, "A")
    if Q.shape != (n, n):
        raise DimensionError(f"Q tem forma {Q.shape}, esperado {(n, n)}")
    if not (np.isfinite(T) and T > 0):
        raise DomainError(f"período de amostragem deve ser > 0, recebido {T}")

    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -A
    block[:n, n:] = Q
    block[n:, n:] = A.T
    E = sla.expm(block * T)
    Q_d = E[n:, n:].T @ E[:n, n:]
    return as_symmetric_psd(symmetrize(Q_d), "Q_d")


# =============================================================================
# EQUAÇÕES DE RICCATI E LYAPUNOV
# =============================================================================

def dare_residual(A, B, W, U, S) -> float:
    """‖S − RHS(S)‖∞ da equação algébrica de Riccati discreta."""
    BtS = B.T @ S
    gain_term = A.T @ S @ B @ np.linalg.solve(BtS @ B + U, BtS @ A)
    rhs = A.T @ S @ A + W - gain_term
    return float(np.linalg.norm(S - rhs, np.inf))


def solve_dare(A, B, W, U, max_iter: Optional[int] = None, tol: float = DARE_TOL) -> np.ndarray:
    """
    Solução estabilizante de S = AᵀSA + W − AᵀSB(BᵀSB + U)⁻¹BᵀSA.

    Usa o algoritmo de duplicação estruturada inicializado em W
    (A₀ = A, G₀ = BU⁻¹Bᵀ, H₀ = W), com Hₖ → S, e refina com passos de
    Newton (Hewer) se o resíduo estagnar. A mesma rotina resolve a
    Riccati do filtro com argumentos transpostos (Aᵀ, Cᵀ, Q_d, R_d).

    Args:
        A: n×n
        B: n×p
        W: n×n PSD
        U: p×p definida positiva
        max_iter: limite de iterações (default 10⁵)
        tol: tolerância relativa do resíduo

    Raises:
        ConvergenceError: não convergiu no limite, com o resíduo final
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    W = as_symmetric_psd(W, "W")
    U = as_symmetric_psd(U, "U")
    n = require_square(A, "A")
    p = B.shape[1]
    if B.shape[0] != n or W.shape != (n, n) or U.shape != (p, p):
        raise DimensionError(
            f"dimensões incompatíveis: A{A.shape} B{B.shape} W{W.shape} U{U.shape}"
        )
    try:
        G = symmetrize(B @ np.linalg.solve(U, B.T)) if p else np.zeros((n, n))
    except np.linalg.LinAlgError as e:
        raise DomainError(f"U deve ser definida positiva: {e}") from e

    max_iter = DEFAULT_DARE_MAX_ITER if max_iter is None else int(max_iter)
    eye = np.eye(n)
    Ak = np.array(A)
    Gk = G
    Hk = np.array(W)

    iterations = 0
    for iterations in range(1, max_iter + 1):
        Wk = eye + Gk @ Hk
        try:
            inv_A = np.linalg.solve(Wk, Ak)
            inv_G = np.linalg.solve(Wk, Gk)
        except np.linalg.LinAlgError as e:
            raise ConvergenceError(f"duplicação singular: {e}", float("inf"), iterations) from e

        H_next = symmetrize(Hk + Ak.T @ Hk @ inv_A)
        Gk = symmetrize(Gk + Ak @ inv_G @ Ak.T)
        Ak = Ak @ inv_A

        if not np.all(np.isfinite(H_next)):
            raise ConvergenceError("iteração divergiu", float("inf"), iterations)

        step = float(np.linalg.norm(H_next - Hk, np.inf))
        Hk = H_next
        if step <= 1e-15 * (1.0 + float(np.linalg.norm(Hk, np.inf))):
            break

    S = Hk
    residual = dare_residual(A, B, W, U, S)

    # Refinamento de Newton (Hewer) quando a duplicação estagna acima da tolerância:
    # S ← solução de S = A_clᵀ S A_cl + W + Fᵀ U F, com F = (BᵀSB + U)⁻¹BᵀSA
    polish = 0
    while residual > tol * (1.0 + np.linalg.norm(S, np.inf)) and iterations + polish < max_iter:
        polish += 1
        try:
            BtS = B.T @ S
            F = np.linalg.solve(BtS @ B + U, BtS @ A)
            A_cl = A - B @ F
            S_next = np.array(solve_dlyap(A_cl.T, symmetrize(W + F.T @ U @ F)))
        except (np.linalg.LinAlgError, StabilityError, ConvergenceError) as e:
            logger.debug(f"DARE: refinamento de Newton interrompido ({e})")
            break
        new_residual = dare_residual(A, B, W, U, S_next)
        if not np.isfinite(new_residual) or new_residual >= residual:
            break
        S, residual = S_next, new_residual

    if residual > tol * (1.0 + np.linalg.norm(S, np.inf)):
        raise ConvergenceError("Riccati discreta não convergiu", residual, iterations + polish)

    logger.debug(f"DARE: {iterations} duplicações + {polish} refinamentos, resíduo={residual:.2e}")
    return as_symmetric_psd(S, "S")


def solve_dlyap(M, N) -> np.ndarray:
    """
    Resolve X = M X Mᵀ + N (série Σ Mⁱ N (Mⁱ)ᵀ).

    Raises:
        StabilityError: raio espectral de M >= 1 − 1e-9 (série diverge)
    """
    M = as_matrix(M, "M")
    N = as_symmetric_psd(N, "N")
    n = require_square(M, "M")
    if N.shape != (n, n):
        raise DimensionError(f"N tem forma {N.shape}, esperado {(n, n)}")

    rho = spectral_radius(M)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise StabilityError("equação de Lyapunov sem solução limitada", rho)

    X = symmetrize(sla.solve_discrete_lyapunov(M, N))
    residual = float(np.linalg.norm(X - M @ X @ M.T - N, np.inf))
    if residual > DLYAP_TOL * (1.0 + np.linalg.norm(X, np.inf)):
        # Fallback: série por duplicação de Smith, recomeçando de N
        X = np.array(N)
        Mk = np.array(M)
        for _ in range(200):
            X = X + Mk @ X @ Mk.T
            Mk = Mk @ Mk
            if np.linalg.norm(Mk, np.inf) < 1e-18:
                break
        X = symmetrize(X)
        residual = float(np.linalg.norm(X - M @ X @ M.T - N, np.inf))
        if residual > DLYAP_TOL * (1.0 + np.linalg.norm(X, np.inf)):
            raise ConvergenceError("Lyapunov discreta imprecisa", residual, 200)

    return as_symmetric_psd(X, "X")


# =============================================================================
# AUTOPROBLEMA GENERALIZADO
# =============================================================================

def generalized_symmetric_eig_max(M, N) -> Tuple[float, np.ndarray]:
    """
    Maior λ e vetor v com Mv = λNv e vᵀNv = 1.

    Redução de Cholesky N = LLᵀ para o problema padrão L⁻¹ML⁻ᵀ y = λy,
    com v = L⁻ᵀy. O sinal de v é fixado (maior componente positiva).

    Raises:
        ConditioningError: N singular (menor autovalor < 1e-12 × maior)
    """
    M = as_symmetric_psd(M, "M")
    N = as_symmetric_psd(N, "N")
    n = require_square(M, "M")
    if N.shape != (n, n):
        raise DimensionError(f"N tem forma {N.shape}, esperado {(n, n)}")

    n_eig = np.linalg.eigvalsh(N)
    if n_eig.max() <= 0.0 or n_eig.min() < 1e-12 * n_eig.max():
        raise ConditioningError(
            f"N singular ou mal condicionada (autovalores em [{n_eig.min():.3e}, {n_eig.max():.3e}])"
        )
    try:
        chol = sla.cholesky(N, lower=True)
    except sla.LinAlgError as e:
        raise ConditioningError(f"Cholesky de N falhou: {e}") from e

    left = sla.solve_triangular(chol, M, lower=True)
    reduced = symmetrize(sla.solve_triangular(chol, left.T, lower=True))
    values, vectors = np.linalg.eigh(reduced)
    y = vectors[:, -1]
    v = sla.solve_triangular(chol.T, y, lower=False)

    pivot = int(np.argmax(np.abs(v)))
    if v[pivot] < 0:
        v = -v
    v = v / np.sqrt(float(v @ N @ v))
    return float(values[-1]), v
