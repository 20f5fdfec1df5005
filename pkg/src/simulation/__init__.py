"""Simulação Monte Carlo, ataque de replay, detector χ² e estatísticas de detecção."""

from .detector import (
    DetectorConfig,
    ReplayAttack,
    alarm_flags,
    disjoint_window_steps,
    windowed_statistic,
)
from .engine import (
    BatchTrace,
    SimTrace,
    map_trial_chunks,
    mismatch_contribution,
    simulate,
    simulate_batch,
    trial_chunks,
)
from .metrics import (
    COST_TABLE_COLUMNS,
    MeanGResult,
    ResidualStatistics,
    RocCurve,
    auc_standard_error,
    cost_ratio_table,
    disjoint_alarm_rate,
    empirical_lqg_cost,
    monte_carlo_mean_g,
    residual_statistics,
    roc_auc,
    roc_curve,
    roc_points,
)
from .rng import TrialStreams, derive_seed

__all__ = [
    'BatchTrace',
    'COST_TABLE_COLUMNS',
    'DetectorConfig',
    'MeanGResult',
    'ReplayAttack',
    'ResidualStatistics',
    'RocCurve',
    'SimTrace',
    'TrialStreams',
    'alarm_flags',
    'auc_standard_error',
    'cost_ratio_table',
    'derive_seed',
    'disjoint_alarm_rate',
    'disjoint_window_steps',
    'empirical_lqg_cost',
    'map_trial_chunks',
    'mismatch_contribution',
    'monte_carlo_mean_g',
    'residual_statistics',
    'roc_auc',
    'roc_curve',
    'roc_points',
    'simulate',
    'simulate_batch',
    'trial_chunks',
    'windowed_statistic',
]
