"""
Simulação Monte Carlo da malha fechada com watermark e ataque de replay.

Um passo k (estimador de ganho fixo, inicializado em x̂_{0|-1} = 0 e
x_0 ~ N(0, P)):

    y_k       = C x_k + v_k                 (ou a saída gravada, durante o replay)
    r_k       = y_k − C x̂_{k|k-1}
    x̂_{k|k}   = x̂_{k|k-1} + K r_k
    u_k       = L x̂_{k|k} + Δu_k,           Δu_k ~ N(0, 𝒬)
    x_{k+1}   = A_d x_k + B_d u_k + w_k
    x̂_{k+1|k} = A_d x̂_{k|k} + B_d u_k

Durante o replay o estimador e o detector recebem as saídas gravadas sem
alteração; a planta real continua evoluindo com o controle resultante.

Todos os trials de um lote avançam juntos (vetorizado no eixo do trial);
cada trial consome apenas os seus próprios fluxos, então o resultado de um
trial é o mesmo em `simulate` e em qualquer lote de `simulate_batch`.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from ..control import ClosedLoopDesign, CostWeights
from ..exceptions import ConfigurationError, DimensionError
from ..numerics import chi2_sf, psd_sqrt
from ..plant import DiscretePlant
from ..runtime import get_runtime_config
from ..watermark import WatermarkDesign
from .detector import DetectorConfig, ReplayAttack, alarm_flags, windowed_statistic
from .rng import TrialStreams

# Passos sorteados por bloco de cada fluxo (memória limitada em horizontes longos)
DRAW_BLOCK = 1024

ChunkResult = TypeVar("ChunkResult")


# =============================================================================
# TRAÇOS
# =============================================================================

@dataclass(frozen=True, eq=False)
class BatchTrace:
    """
    Saída de `simulate_batch`; eixo 0 = trial, eixo 1 = passo.

    Campos opcionais só são preenchidos quando pedidos (store_states,
    weights).
    """

    trials: tuple
    quad: np.ndarray
    g: np.ndarray
    alarms: np.ndarray
    attack_active: np.ndarray
    residuals: Optional[np.ndarray] = None
    states: Optional[np.ndarray] = None
    estimates: Optional[np.ndarray] = None
    controls: Optional[np.ndarray] = None
    outputs: Optional[np.ndarray] = None
    stage_cost: Optional[np.ndarray] = None
    zeta: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Registro passo a passo de uma trajetória semeada."""

    states: np.ndarray
    estimates: np.ndarray
    controls: np.ndarray
    outputs: np.ndarray
    residuals: np.ndarray
    g: np.ndarray
    p_values: np.ndarray
    alarms: np.ndarray
    attack_active: np.ndarray
    mismatch_term: np.ndarray
    zeta: Optional[np.ndarray]
    threshold: float
    window: int

    @property
    def horizon(self) -> int:
        return int(self.g.shape[0])

    @property
    def warmup(self) -> np.ndarray:
        """Passos com janela incompleta (k < 𝒯 − 1), fora das estatísticas."""
        return np.arange(self.horizon) < self.window - 1

    def to_frame(self) -> pd.DataFrame:
        """Colunas de gk_trace.csv, em ordem fixa."""
        return pd.DataFrame({
            'step': np.arange(self.horizon),
            'g_k': self.g,
            'threshold': np.full(self.horizon, self.threshold),
            'alarm': self.alarms.astype(int),
            'attack_active': self.attack_active.astype(int),
            'p_value': self.p_values,
            'mismatch_term': self.mismatch_term,
        })


# =============================================================================
# SIMULAÇÃO
# =============================================================================

def _check_inputs(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    wm: WatermarkDesign,
    detector: DetectorConfig,
    attack: Optional[ReplayAttack],
    horizon: int,
) -> None:
    if horizon < 1:
        raise ConfigurationError(f"horizonte deve ser >= 1, recebido {horizon}", field="simulation.horizon")
    if design.K.shape != (plant.n, plant.m) or design.L.shape != (plant.p, plant.n):
        raise DimensionError("ganhos do projeto incompatíveis com a planta")
    if wm.cov_Q.shape != (plant.p, plant.p):
        raise DimensionError(f"cov_Q deve ser {plant.p}x{plant.p}, é {wm.cov_Q.shape}")
    if detector.dof != plant.m * detector.window:
        raise DimensionError(f"detector com {detector.dof} graus de liberdade para m={plant.m}")
    if attack is not None:
        attack.validate(horizon, detector.window)


def simulate_batch(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    wm: WatermarkDesign,
    detector: DetectorConfig,
    attack: Optional[ReplayAttack],
    horizon: int,
    seed: int,
    trials: Sequence[int],
    weights: Optional[CostWeights] = None,
    store_states: bool = False,
    store_residuals: bool = False,
) -> BatchTrace:
    """
    Simula os trials indicados em paralelo vetorial.

    Args:
        trials: índices dos trials (definem os fluxos aleatórios)
        weights: se dado, guarda o custo de estágio xᵀWx + uᵀUu por passo
        store_states: guarda estados, estimativas, controles e saídas
        store_residuals: guarda os resíduos r_k

    Returns:
        BatchTrace com g_k e alarmes de todos os trials
    """
    _check_inputs(plant, design, wm, detector, attack, horizon)
    trials = tuple(int(t) for t in trials)
    if not trials:
        raise ConfigurationError("lote de trials vazio", field="simulation.trials")
    if weights is not None:
        weights.check_against(plant.n, plant.p)

    n, p, m = plant.n, plant.p, plant.m
    batch = len(trials)
    A, B, C = plant.A_d, plant.B_d, plant.C
    K, L = design.K, design.L
    resid_inv = design.resid_cov_inv
    root_w = psd_sqrt(plant.Q_d)
    root_v = psd_sqrt(plant.R_d)
    root_q = psd_sqrt(wm.cov_Q)

    streams = [TrialStreams.for_trial(seed, t) for t in trials]
    x = np.stack([s.initial.standard_normal(n) for s in streams]) @ psd_sqrt(design.P).T
    x_pred = np.zeros((batch, n))

    quad = np.empty((batch, horizon))
    residuals = np.empty((batch, horizon, m)) if store_residuals else None
    states = np.empty((batch, horizon, n)) if store_states else None
    estimates = np.empty((batch, horizon, n)) if store_states else None
    controls = np.empty((batch, horizon, p)) if store_states else None
    outputs = np.empty((batch, horizon, m)) if store_states else None
    stage_cost = np.empty((batch, horizon)) if weights is not None else None

    if attack is not None:
        recorded = np.empty((batch, attack.record_len, m))
        active = attack.active_mask(horizon)
        zeta_at_record = np.zeros((batch, n))
        zeta = np.zeros((batch, n))
    else:
        recorded = None
        active = np.zeros(horizon, dtype=bool)
        zeta = None

    for block_start in range(0, horizon, DRAW_BLOCK):
        steps = min(DRAW_BLOCK, horizon - block_start)
        w_blk = np.stack([s.process.standard_normal((steps, n)) for s in streams]) @ root_w.T
        v_blk = np.stack([s.measurement.standard_normal((steps, m)) for s in streams]) @ root_v.T
        du_blk = np.stack([s.watermark.standard_normal((steps, p)) for s in streams]) @ root_q.T

        for j in range(steps):
            k = block_start + j
            y = x @ C.T + v_blk[:, j]

            if attack is not None:
                if k == attack.record_start:
                    zeta_at_record = x_pred.copy()
                if attack.record_start <= k < attack.record_start + attack.record_len:
                    recorded[:, k - attack.record_start] = y
                if k == attack.replay_start:
                    zeta = x_pred - zeta_at_record
                if active[k]:
                    y = recorded[:, attack.replay_offset(k)]

            r = y - x_pred @ C.T
            quad[:, k] = np.einsum('bi,ij,bj->b', r, resid_inv, r)
            x_filt = x_pred + r @ K.T
            u = x_filt @ L.T + du_blk[:, j]

            if store_residuals:
                residuals[:, k] = r
            if store_states:
                states[:, k] = x
                estimates[:, k] = x_filt
                controls[:, k] = u
                outputs[:, k] = y
            if weights is not None:
                stage_cost[:, k] = (
                    np.einsum('bi,ij,bj->b', x, weights.W, x)
                    + np.einsum('bi,ij,bj->b', u, weights.U, u)
                )

            drive = u @ B.T
            x = x @ A.T + drive + w_blk[:, j]
            x_pred = x_filt @ A.T + drive

    g = windowed_statistic(quad, detector.window)
    return BatchTrace(
        trials=trials,
        quad=quad,
        g=g,
        alarms=alarm_flags(g, detector),
        attack_active=active,
        residuals=residuals,
        states=states,
        estimates=estimates,
        controls=controls,
        outputs=outputs,
        stage_cost=stage_cost,
        zeta=zeta,
    )


def mismatch_contribution(
    design: ClosedLoopDesign,
    zeta: np.ndarray,
    attack: ReplayAttack,
    window: int,
    horizon: int,
) -> np.ndarray:
    """
    Termo determinístico de g_k sob ataque: Σ_janela ζᵀ(𝒜ʲ)ᵀCᵀ𝒫⁻¹C𝒜ʲζ,
    com j = i − replay_start para os passos i da janela já em replay.
    """
    per_step = np.zeros(horizon)
    resid_inv = design.resid_cov_inv
    z = np.asarray(zeta, dtype=float)
    for k in range(attack.replay_start, min(attack.replay_end, horizon)):
        e = design.C @ z
        per_step[k] = float(e @ resid_inv @ e)
        z = design.closed_loop @ z
    return windowed_statistic(per_step, window)


def simulate(
    plant: DiscretePlant,
    design: ClosedLoopDesign,
    wm: WatermarkDesign,
    detector: DetectorConfig,
    attack: Optional[ReplayAttack],
    horizon: int,
    seed: int,
    trial: int = 0,
) -> SimTrace:
    """
    Uma trajetória completa (trial `trial` da semente `seed`).

    Raises:
        ConfigurationError: janela de ataque inviável
    """
    batch = simulate_batch(
        plant, design, wm, detector, attack, horizon, seed, [trial],
        store_states=True, store_residuals=True,
    )
    g = batch.g[0]
    warm = np.arange(horizon) < detector.window - 1
    p_values = np.where(warm, np.nan, chi2_sf(detector.dof, g))

    zeta = None
    mismatch = np.zeros(horizon)
    if attack is not None:
        zeta = batch.zeta[0]
        mismatch = mismatch_contribution(design, zeta, attack, detector.window, horizon)

    trace = SimTrace(
        states=batch.states[0],
        estimates=batch.estimates[0],
        controls=batch.controls[0],
        outputs=batch.outputs[0],
        residuals=batch.residuals[0],
        g=g,
        p_values=p_values,
        alarms=batch.alarms[0],
        attack_active=batch.attack_active,
        mismatch_term=mismatch,
        zeta=zeta,
        threshold=detector.threshold,
        window=detector.window,
    )
    logger.debug(
        f"Trajetória T={plant.T:g} seed={seed} trial={trial}: "
        f"{int(trace.alarms.sum())} alarmes em {horizon} passos"
    )
    return trace


# =============================================================================
# EXECUÇÃO EM LOTES
# =============================================================================

def trial_chunks(trials: int, chunk_size: Optional[int] = None) -> List[range]:
    """Divide 0..trials-1 em faixas contíguas."""
    if trials < 1:
        raise ConfigurationError(f"trials deve ser >= 1, recebido {trials}", field="simulation.trials")
    size = chunk_size or get_runtime_config().chunk_trials
    return [range(start, min(start + size, trials)) for start in range(0, trials, size)]


def map_trial_chunks(
    fn: Callable[[range], ChunkResult],
    trials: int,
    desc: str = "trials",
    workers: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> List[ChunkResult]:
    """
    Executa `fn` em cada faixa de trials num ThreadPoolExecutor.

    Os resultados voltam na ordem das faixas, independente da ordem de
    conclusão.
    """
    runtime = get_runtime_config()
    chunks = trial_chunks(trials, chunk_size)
    workers = workers or runtime.workers

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(tqdm(
            executor.map(fn, chunks),
            total=len(chunks),
            desc=desc,
            disable=not runtime.show_progress,
            leave=False,
        ))
    return results
