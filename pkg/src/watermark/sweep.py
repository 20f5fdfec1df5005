"""
Varredura conjunta no período de amostragem.

Para cada T da grade: discretiza, sintetiza Kalman/LQG, otimiza 𝒬 com o
mesmo orçamento μ e registra a linha. O melhor T é o maximizador de
E[Δg_k] na grade, opcionalmente refinado por seção áurea entre os vizinhos.

Os pesos W, U são aplicados por amostra em todos os T.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..control import CostWeights, classify_A_script, synthesize
from ..exceptions import ConfigurationError, NumericalError
from ..plant import ContinuousPlant, discretize
from ..runtime import get_runtime_config
from .design import DEFAULT_WINDOW, optimize_watermark_fixed_T

STATUS_OK = "ok"
STATUS_UNNECESSARY = "watermark-unnecessary"
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class SweepRow:
    """Resultado de um período da varredura."""

    T: float
    status: str
    cov_Q: Optional[np.ndarray] = None
    expected_shift: Optional[float] = None
    cost_increase: Optional[float] = None
    nominal_cost: Optional[float] = None
    spectral_radius_A: Optional[float] = None
    is_refinement: bool = False

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


@dataclass
class SweepResult:
    """Linhas em ordem da grade + maximizador."""

    rows: List[SweepRow] = field(default_factory=list)
    argmax_T: Optional[float] = None
    budget_mu: float = 0.0
    T_bar: float = 0.0

    @property
    def best_row(self) -> Optional[SweepRow]:
        for row in self.rows:
            if row.ok and self.argmax_T is not None and row.T == self.argmax_T:
                return row
        return None

    def to_frame(self) -> pd.DataFrame:
        """Tabela com colunas fixas (T, expected_shift, cost_increase, ...)."""
        records = []
        for row in self.rows:
            records.append({
                'T': row.T,
                'expected_shift': row.expected_shift,
                'cost_increase': row.cost_increase,
                'nominal_cost': row.nominal_cost,
                'spectral_radius': row.spectral_radius_A,
                'status': row.status,
                'is_argmax': bool(self.argmax_T is not None and row.ok and row.T == self.argmax_T),
                'is_refinement': row.is_refinement,
            })
        columns = [
            'T', 'expected_shift', 'cost_increase', 'nominal_cost',
            'spectral_radius', 'status', 'is_argmax', 'is_refinement',
        ]
        return pd.DataFrame.from_records(records, columns=columns)


def evaluate_period(
    cont: ContinuousPlant,
    weights: CostWeights,
    T: float,
    budget_mu: float,
    window: int = DEFAULT_WINDOW,
) -> SweepRow:
    """Uma linha da varredura; falhas numéricas viram status, não exceção."""
    try:
        plant = discretize(cont, T)
        design = synthesize(plant, weights)
        verdict = classify_A_script(design)
        if not verdict.stable:
            logger.info(f"T={T:g}: 𝒜 instável (ρ={verdict.spectral_radius:.4f}), watermark desnecessário")
            return SweepRow(
                T=T,
                status=STATUS_UNNECESSARY,
                nominal_cost=design.nominal_cost,
                spectral_radius_A=verdict.spectral_radius,
            )
        wm = optimize_watermark_fixed_T(plant, design, weights, budget_mu, window)
        return SweepRow(
            T=T,
            status=STATUS_OK,
            cov_Q=wm.cov_Q,
            expected_shift=wm.expected_shift,
            cost_increase=wm.cost_increase,
            nominal_cost=design.nominal_cost,
            spectral_radius_A=verdict.spectral_radius,
        )
    except NumericalError as e:
        logger.warning(f"T={T:g}: síntese falhou: {e}")
        return SweepRow(T=T, status=f"failed: {e}")


def golden_section_refine(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-4,
    max_iter: int = 60,
) -> Tuple[float, float]:
    """
    Maximiza f unimodal em [lo, hi] por seção áurea.

    Returns:
        (x, f(x)) do melhor ponto avaliado
    """
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(abs(a), abs(b), 1e-12):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def sweep_sampling_period(
    cont: ContinuousPlant,
    weights_cont: CostWeights,
    T_grid: Sequence[float],
    T_bar: float,
    budget_mu: float,
    window: int = DEFAULT_WINDOW,
    refine: bool = False,
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Avalia a grade de T (linhas independentes, em paralelo) e acha o maximizador.

    Raises:
        ConfigurationError: grade vazia, T fora de (0, T̄], μ <= 0
    """
    grid = [float(T) for T in T_grid]
    if not grid:
        raise ConfigurationError("grade de períodos vazia", field="sampling.grid")
    if not (np.isfinite(T_bar) and T_bar > 0):
        raise ConfigurationError(f"T̄ deve ser > 0, recebido {T_bar}", field="sampling.upper_bound")
    bad = [T for T in grid if not (0.0 < T <= T_bar)]
    if bad:
        raise ConfigurationError(f"períodos fora de (0, {T_bar}]: {bad}", field="sampling.grid")
    if not (np.isfinite(budget_mu) and budget_mu > 0):
        raise ConfigurationError(f"μ deve ser > 0, recebido {budget_mu}", field="watermark.budget_mu")

    workers = workers or get_runtime_config().workers
    logger.info(f"Varredura: {len(grid)} períodos, μ={budget_mu:g}, 𝒯={window}, workers={workers}")

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(
            lambda T: evaluate_period(cont, weights_cont, T, budget_mu, window), grid
        ))

    result = SweepResult(rows=rows, budget_mu=budget_mu, T_bar=T_bar)
    candidates = [row for row in rows if row.ok]
    if not candidates:
        logger.warning("Nenhum período válido na grade")
        return result

    best = max(candidates, key=lambda row: row.expected_shift)
    result.argmax_T = best.T
    logger.info(f"Melhor T na grade: {best.T:g} (E[Δg]={best.expected_shift:.6g})")

    if refine and len(grid) > 1:
        ordered = sorted(set(grid))
        idx = ordered.index(best.T)
        lo = ordered[max(idx - 1, 0)]
        hi = ordered[min(idx + 1, len(ordered) - 1)]

        def objective(T: float) -> float:
            row = evaluate_period(cont, weights_cont, T, budget_mu, window)
            return row.expected_shift if row.ok else -math.inf

        T_star, shift_star = golden_section_refine(objective, lo, hi)
        if shift_star > best.expected_shift:
            refined = evaluate_period(cont, weights_cont, T_star, budget_mu, window)
            result.rows.append(replace(refined, is_refinement=True))
            result.argmax_T = T_star
            logger.info(f"Refinamento por seção áurea: T*={T_star:.6g} (E[Δg]={shift_star:.6g})")

    return result
