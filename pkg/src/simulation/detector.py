"""
Detector χ² em janela e modelo do ataque de replay.

    g_k = Σ_{i=k−𝒯+1}^{k} r_iᵀ 𝒫⁻¹ r_i,   alarme ⇔ g_k > limiar
    limiar = quantil χ²(m𝒯) em 1 − α
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import ConfigurationError
from ..numerics import chi2_quantile


@dataclass(frozen=True)
class DetectorConfig:
    """Janela 𝒯, probabilidade de falso alarme α, limiar e graus de liberdade."""

    window: int
    false_alarm_prob: float
    threshold: float
    dof: int

    @classmethod
    def build(cls, m: int, window: int, false_alarm_prob: float = 0.05) -> "DetectorConfig":
        if window < 1:
            raise ConfigurationError(f"janela deve ser >= 1, recebido {window}", field="detector.window")
        if not (0.0 < false_alarm_prob < 1.0):
            raise ConfigurationError(
                f"α deve estar em (0,1), recebido {false_alarm_prob}", field="detector.alpha"
            )
        dof = int(m) * int(window)
        return cls(
            window=int(window),
            false_alarm_prob=float(false_alarm_prob),
            threshold=chi2_quantile(dof, 1.0 - false_alarm_prob),
            dof=dof,
        )


@dataclass(frozen=True)
class ReplayAttack:
    """Grava `record_len` saídas a partir de `record_start` e as reenvia a partir de `replay_start`."""

    record_start: int
    record_len: int
    replay_start: int

    def validate(self, horizon: int, window: int) -> None:
        """
        Raises:
            ConfigurationError: janela de ataque inviável
        """
        if self.record_start < 0:
            raise ConfigurationError("record_start deve ser >= 0", field="attack.record_start")
        if self.record_len < window:
            raise ConfigurationError(
                f"record_len ({self.record_len}) deve ser >= janela ({window})",
                field="attack.record_len",
            )
        if self.replay_start < self.record_start + self.record_len:
            raise ConfigurationError(
                "replay deve começar depois do fim da gravação", field="attack.replay_start"
            )
        if horizon <= self.replay_start + window:
            raise ConfigurationError(
                f"horizonte ({horizon}) deve exceder replay_start + janela "
                f"({self.replay_start + window})",
                field="simulation.horizon",
            )

    @property
    def replay_end(self) -> int:
        return self.replay_start + self.record_len

    def active(self, k: int) -> bool:
        return self.replay_start <= k < self.replay_end

    def source_index(self, k: int) -> int:
        return self.record_start + (k - self.replay_start)

    def replay_offset(self, k: int) -> int:
        """Posição no buffer gravado (indexado a partir de record_start)."""
        return k - self.replay_start

    def active_mask(self, horizon: int) -> np.ndarray:
        steps = np.arange(horizon)
        return (steps >= self.replay_start) & (steps < self.replay_end)


def windowed_statistic(quad: np.ndarray, window: int) -> np.ndarray:
    """
    Soma em janela deslizante ao longo do último eixo.

    Passos k < 𝒯 − 1 recebem a soma parcial (aquecimento).
    """
    quad = np.asarray(quad, dtype=float)
    g = np.empty_like(quad)
    head = min(window - 1, quad.shape[-1])
    g[..., :head] = np.cumsum(quad[..., :head], axis=-1)
    if quad.shape[-1] >= window:
        g[..., window - 1:] = sliding_window_view(quad, window, axis=-1).sum(axis=-1)
    return g


def disjoint_window_steps(start: int, stop: int, window: int) -> np.ndarray:
    """Índices k de fim de janelas disjuntas totalmente contidas em [start, stop)."""
    first = start + window - 1
    if first >= stop:
        return np.zeros(0, dtype=int)
    return np.arange(first, stop, window)


def alarm_flags(g: np.ndarray, detector: DetectorConfig, warmup: Optional[int] = None) -> np.ndarray:
    """g_k > limiar, falso durante o aquecimento."""
    warmup = detector.window - 1 if warmup is None else warmup
    flags = np.asarray(g) > detector.threshold
    flags[..., :warmup] = False
    return flags
