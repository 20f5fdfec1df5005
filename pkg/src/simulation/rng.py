"""
Fluxos aleatórios reprodutíveis.

Cada trial tem sua própria SeedSequence (entropia = seed, spawn_key = índice
do trial) e quatro subfluxos independentes: ruído de processo, ruído de
medição, watermark e estado inicial. O resultado de um trial não depende da
ordem de execução nem do tamanho do lote.
"""
import hashlib
from dataclasses import dataclass

import numpy as np

STREAM_LABELS = ("process", "measurement", "watermark", "initial")


def derive_seed(seed: int, label: str) -> int:
    """Semente derivada por hash rotulado (sha256), estável entre versões."""
    digest = hashlib.sha256(f"{label}:{int(seed)}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class TrialStreams:
    """Geradores de um trial."""

    trial: int
    process: np.random.Generator
    measurement: np.random.Generator
    watermark: np.random.Generator
    initial: np.random.Generator

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "TrialStreams":
        root = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
        children = root.spawn(len(STREAM_LABELS))
        generators = {
            label: np.random.Generator(np.random.PCG64(child))
            for label, child in zip(STREAM_LABELS, children)
        }
        return cls(trial=int(trial), **generators)
