"""
Estatísticas de desempenho do detector a partir de trials Monte Carlo.

Os dois braços (sem ataque / com ataque) usam os mesmos trials e a mesma
semente: o braço sem ataque é a mesma trajetória com o replay desligado.
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy.special import ndtri

from ..control import ClosedLoopDesign, CostWeights, synthesize
from ..exceptions import ConfigurationError, NumericalError, StabilityError
from ..plant import ContinuousPlant, DiscretePlant, discretize
from ..watermark import (
    DEFAULT_WINDOW,
    STATUS_OK,
    STATUS_UNNECESSARY,
    WatermarkDesign,
    optimize_watermark_fixed_T,
    zero_watermark,
)
from .detector import DetectorConfig, ReplayAttack, disjoint_window_steps
from .engine import map_trial_chunks, simulate_batch
from .rng import derive_seed

DEFAULT_CONFIDENCE = 0.95


def _z_value(confidence: float) -> float:
    return float(ndtri(0.5 + confidence / 2.0))


def _half_width(samples: np.ndarray, confidence: float) -> float:
    if samples.size < 2:
        return float('nan')
    return _z_value(confidence) * float(np.std(samples, ddof=1)) / math.sqrt(samples.size)


# =============================================================================
# MÉDIA DE g_k
# =============================================================================

@dataclass(frozen=True)
class MeanGResult:
    """Médias de g_k nos dois braços, com meia-largura do intervalo normal."""

    mean_no_attack: float
    mean_under_attack: float
    half_width_no_attack: float
    half_width_under_attack: float
    mean_shift: float
    half_width_shift: float
    trials: int
    steps_per_trial: int


def _statistic_steps(attack: Optional[ReplayAttack], horizon: int, window: int, settle: int) -> np.ndarray:
    if attack is None:
        start = max(window - 1, horizon // 10)
        stop = horizon
    else:
        start = attack.replay_start + settle
        stop = min(attack.replay_end, horizon)
    if start >= stop:
        raise ConfigurationError(
            f"sem passos para estatística após o assentamento ({start} >= {stop})",
            field="attack.record_len",
        )
    return np.arange(start, stop)


def monte_carlo_mean_g(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    wm: WatermarkDesign,
    detector: DetectorConfig,
    attack: Optional[ReplayAttack],
    horizon: int,
    seed: int,
    trials: int,
    settle: Optional[int] = None,
    confidence: float = DEFAULT_CONFIDENCE,
) -> MeanGResult:
    """
    E[g_k] sem e com ataque, após o transitório.

    Com ataque, a média é tomada nos passos [replay_start + settle,
    replay_start + record_len); o braço sem ataque usa os mesmos passos da
    trajetória pareada. Sem ataque, usa os passos a partir de 10% do
    horizonte e `mean_under_attack` fica NaN.
    """
    settle = detector.window if settle is None else settle
    steps = _statistic_steps(attack, horizon, detector.window, settle)

    def run_chunk(chunk: range):
        clean = simulate_batch(plant, design, wm, detector, None, horizon, seed, chunk)
        clean_means = clean.g[:, steps].mean(axis=1)
        if attack is None:
            return clean_means, np.full(len(chunk), np.nan)
        attacked = simulate_batch(plant, design, wm, detector, attack, horizon, seed, chunk)
        return clean_means, attacked.g[:, steps].mean(axis=1)

    parts = map_trial_chunks(run_chunk, trials, desc="E[g_k]")
    clean = np.concatenate([p[0] for p in parts])
    attacked = np.concatenate([p[1] for p in parts])
    shift = attacked - clean

    result = MeanGResult(
        mean_no_attack=float(clean.mean()),
        mean_under_attack=float(attacked.mean()),
        half_width_no_attack=_half_width(clean, confidence),
        half_width_under_attack=_half_width(attacked, confidence) if attack is not None else float('nan'),
        mean_shift=float(shift.mean()),
        half_width_shift=_half_width(shift, confidence) if attack is not None else float('nan'),
        trials=int(trials),
        steps_per_trial=int(steps.size),
    )
    logger.debug(
        f"E[g_k] T={plant.T:g}: sem ataque={result.mean_no_attack:.4f}, "
        f"com ataque={result.mean_under_attack:.4f} ({trials} trials x {steps.size} passos)"
    )
    return result


# =============================================================================
# CALIBRAÇÃO E RESÍDUOS
# =============================================================================

def disjoint_alarm_rate(
    g: np.ndarray,
    detector: DetectorConfig,
    start: int = 0,
    stop: Optional[int] = None,
) -> float:
    """
    Fração de alarmes em janelas disjuntas de [start, stop).

    `g` pode ser (passos,) ou (trials, passos).
    """
    g = np.atleast_2d(np.asarray(g, dtype=float))
    stop = g.shape[1] if stop is None else stop
    steps = disjoint_window_steps(start, stop, detector.window)
    if steps.size == 0:
        raise ConfigurationError("nenhuma janela completa no intervalo pedido", field="detector.window")
    return float(np.mean(g[:, steps] > detector.threshold))


@dataclass(frozen=True, eq=False)
class ResidualStatistics:
    """Resumo de brancura dos resíduos do filtro."""

    mean: np.ndarray
    covariance: np.ndarray
    relative_cov_error: float
    lag1_autocorrelation: float
    samples: int


def residual_statistics(residuals: np.ndarray, resid_cov: np.ndarray, burn_in: int = 0) -> ResidualStatistics:
    """
    Média, covariância amostral (vs 𝒫) e maior autocorrelação de lag 1 por canal.

    `residuals` é (passos, m) ou (trials, passos, m); o lag 1 é tomado dentro
    de cada trial.
    """
    r = np.asarray(residuals, dtype=float)
    if r.ndim == 2:
        r = r[None]
    r = r[:, burn_in:]
    flat = r.reshape(-1, r.shape[-1])
    mean = flat.mean(axis=0)
    centered = r - mean
    cov = np.einsum('tki,tkj->ij', centered, centered) / flat.shape[0]
    resid_cov = np.asarray(resid_cov, dtype=float)
    rel_err = float(np.linalg.norm(cov - resid_cov) / np.linalg.norm(resid_cov))

    variance = np.einsum('tki,tki->i', centered, centered)
    lagged = np.einsum('tki,tki->i', centered[:, 1:], centered[:, :-1])
    lag1 = float(np.max(np.abs(lagged / variance)))

    return ResidualStatistics(
        mean=mean,
        covariance=cov,
        relative_cov_error=rel_err,
        lag1_autocorrelation=lag1,
        samples=int(flat.shape[0]),
    )


# =============================================================================
# ROC
# =============================================================================

@dataclass(frozen=True, eq=False)
class RocCurve:
    """Pontos (taxa de falso alarme, taxa de detecção) ordenados e AUC."""

    points: np.ndarray
    auc: float
    auc_std_error: float
    negatives: int
    positives: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'false_alarm_rate': self.points[:, 0],
            'detection_rate': self.points[:, 1],
        })


def roc_points(negatives: np.ndarray, positives: np.ndarray) -> np.ndarray:
    """
    Varre o limiar sobre os valores empíricos agrupados (alarme ⇔ g > limiar).

    Inclui (0,0) (limiar → ∞) e (1,1) (limiar abaixo de todas as amostras).
    """
    neg = np.sort(np.asarray(negatives, dtype=float).ravel())
    pos = np.sort(np.asarray(positives, dtype=float).ravel())
    if neg.size == 0 or pos.size == 0:
        raise ConfigurationError("ROC precisa de amostras nos dois braços")

    thresholds = np.unique(np.concatenate([neg, pos]))[::-1]
    far = (neg.size - np.searchsorted(neg, thresholds, side='right')) / neg.size
    dr = (pos.size - np.searchsorted(pos, thresholds, side='right')) / pos.size

    points = np.vstack([[0.0, 0.0], np.column_stack([far, dr]), [1.0, 1.0]])
    order = np.lexsort((points[:, 1], points[:, 0]))
    return points[order]


def roc_auc(points: np.ndarray) -> float:
    """Área sob a curva (regra do trapézio)."""
    points = np.asarray(points, dtype=float)
    return float(np.trapezoid(points[:, 1], points[:, 0]))


def auc_standard_error(auc: float, negatives: int, positives: int) -> float:
    """Erro padrão da AUC pela aproximação de Hanley-McNeil."""
    q1 = auc / (2.0 - auc)
    q2 = 2.0 * auc * auc / (1.0 + auc)
    var = (
        auc * (1.0 - auc)
        + (positives - 1) * (q1 - auc * auc)
        + (negatives - 1) * (q2 - auc * auc)
    ) / (negatives * positives)
    return math.sqrt(max(var, 0.0))


def roc_curve(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    wm: WatermarkDesign,
    window: int,
    attack: ReplayAttack,
    horizon: int,
    trials: int,
    seed: int,
    settle: Optional[int] = None,
) -> RocCurve:
    """
    Curva ROC por passo, em janelas disjuntas.

    Detecção: g_k nos fins de janelas disjuntas dentro do replay, a partir de
    replay_start + settle. Falso alarme: os mesmos passos da trajetória
    pareada sem ataque.
    """
    if trials < 2:
        raise ConfigurationError(f"ROC precisa de trials >= 2, recebido {trials}", field="simulation.trials")
    if attack is None:
        raise ConfigurationError("ROC precisa de um bloco de ataque", field="attack")

    detector = DetectorConfig.build(plant.m, window)
    settle = window if settle is None else settle
    steps = disjoint_window_steps(attack.replay_start + settle, min(attack.replay_end, horizon), window)
    if steps.size == 0:
        raise ConfigurationError(
            "replay curto demais para uma janela completa após o assentamento",
            field="attack.record_len",
        )

    def run_chunk(chunk: range):
        clean = simulate_batch(plant, design, wm, detector, None, horizon, seed, chunk)
        attacked = simulate_batch(plant, design, wm, detector, attack, horizon, seed, chunk)
        return clean.g[:, steps].ravel(), attacked.g[:, steps].ravel()

    parts = map_trial_chunks(run_chunk, trials, desc=f"ROC T={plant.T:g}")
    negatives = np.concatenate([p[0] for p in parts])
    positives = np.concatenate([p[1] for p in parts])

    points = roc_points(negatives, positives)
    auc = roc_auc(points)
    curve = RocCurve(
        points=points,
        auc=auc,
        auc_std_error=auc_standard_error(auc, negatives.size, positives.size),
        negatives=int(negatives.size),
        positives=int(positives.size),
    )
    logger.debug(f"ROC T={plant.T:g}: AUC={auc:.4f} ± {curve.auc_std_error:.4f}")
    return curve


# =============================================================================
# CUSTO
# =============================================================================

def empirical_lqg_cost(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    wm: WatermarkDesign,
    weights: CostWeights,
    horizon: int,
    trials: int,
    seed: int,
    burn_in: Optional[int] = None,
) -> float:
    """
    Média temporal de xᵀWx + uᵀUu sobre os trials (sem ataque).

    Descarta os primeiros `burn_in` passos (padrão: 10% do horizonte).
    """
    burn_in = horizon // 10 if burn_in is None else burn_in
    if burn_in >= horizon:
        raise ConfigurationError("burn_in deve ser menor que o horizonte", field="simulation.horizon")
    detector = DetectorConfig.build(plant.m, 1)

    def run_chunk(chunk: range):
        batch = simulate_batch(plant, design, wm, detector, None, horizon, seed, chunk, weights=weights)
        return batch.stage_cost[:, burn_in:].mean(axis=1)

    per_trial = np.concatenate(map_trial_chunks(run_chunk, trials, desc=f"J T={plant.T:g}"))
    return float(per_trial.mean())


COST_TABLE_COLUMNS = [
    'T', 'nominal_cost', 'ratio', 'watermarked_cost', 'watermarked_ratio',
    'mc_cost', 'mc_ratio', 'status',
]


def cost_ratio_table(
    cont: ContinuousPlant,
    weights: CostWeights,
    T_list: Sequence[float],
    reference_T: float,
    budget_mu: float,
    horizon: int = 0,
    trials: int = 0,
    seed: int = 0,
    monte_carlo: bool = False,
    window: int = DEFAULT_WINDOW,
) -> pd.DataFrame:
    """
    J_T / J_ref para cada período.

    `ratio` usa o custo nominal em forma fechada; `watermarked_ratio` soma o
    aumento ΔJ do watermark ótimo com o mesmo orçamento μ em todos os T.
    Com `monte_carlo`, `mc_cost` é a média empírica com o watermark ótimo.
    """
    T_values = [float(T) for T in T_list]
    if not T_values:
        raise ConfigurationError("lista de períodos vazia", field="sampling.grid")
    if not any(math.isclose(T, reference_T, rel_tol=1e-12) for T in T_values):
        raise ConfigurationError(
            f"período de referência {reference_T} não está na lista", field="sampling.reference_period"
        )
    if monte_carlo and (horizon < 1 or trials < 1):
        raise ConfigurationError("Monte Carlo requer horizon e trials >= 1", field="simulation")

    records = []
    for T in T_values:
        record = {column: float('nan') for column in COST_TABLE_COLUMNS}
        record['T'] = T
        try:
            plant = discretize(cont, T)
            design = synthesize(plant, weights)
            record['nominal_cost'] = design.nominal_cost
            try:
                wm = optimize_watermark_fixed_T(plant, design, weights, budget_mu, window)
                record['status'] = STATUS_OK
            except StabilityError:
                wm = zero_watermark(plant, design, weights, window)
                record['status'] = STATUS_UNNECESSARY
            record['watermarked_cost'] = design.nominal_cost + wm.cost_increase
            if monte_carlo:
                record['mc_cost'] = empirical_lqg_cost(
                    plant, design, wm, weights, horizon, trials, derive_seed(seed, "table")
                )
        except NumericalError as exc:
            logger.warning(f"T={T:g}: síntese falhou ({exc})")
            record['status'] = f"failed: {exc}"
        records.append(record)

    df = pd.DataFrame.from_records(records, columns=COST_TABLE_COLUMNS)
    ref = df.loc[np.isclose(df['T'], reference_T, rtol=1e-12, atol=0.0)].iloc[0]
    for column, ratio_column in (
        ('nominal_cost', 'ratio'),
        ('watermarked_cost', 'watermarked_ratio'),
        ('mc_cost', 'mc_ratio'),
    ):
        df[ratio_column] = df[column] / ref[column]
    # a linha de referência é exatamente 1
    ref_mask = np.isclose(df['T'], reference_T, rtol=1e-12, atol=0.0)
    for ratio_column in ('ratio', 'watermarked_ratio', 'mc_ratio'):
        df.loc[ref_mask & df[ratio_column].notna(), ratio_column] = 1.0
    return df
