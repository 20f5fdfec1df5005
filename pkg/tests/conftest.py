"""
Fixtures compartilhadas: plantas de referência e ambiente de execução limpo.
"""
import sys
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

# Adicionar raiz do projeto ao path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.control import CostWeights
from src.plant import DiscretePlant, quadrotor_hover_plant, scalar_plant
from src.runtime import reset_runtime_config

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


@pytest.fixture(autouse=True)
def clean_runtime(monkeypatch):
    """Sem barra de progresso e singleton recarregado a cada teste."""
    monkeypatch.delenv("WATERMARK_SHOW_PROGRESS", raising=False)
    monkeypatch.delenv("WATERMARK_WORKERS", raising=False)
    monkeypatch.delenv("WATERMARK_CHUNK_TRIALS", raising=False)
    monkeypatch.delenv("WATERMARK_DARE_MAX_ITER", raising=False)
    reset_runtime_config()
    yield
    reset_runtime_config()


@pytest.fixture
def captured_warnings():
    """Mensagens WARNING emitidas pelo loguru durante o teste."""
    messages = []
    handler_id = logger.add(lambda msg: messages.append(msg.record["message"]), level="WARNING")
    yield messages
    logger.remove(handler_id)


@pytest.fixture
def golden_plant() -> DiscretePlant:
    """a_d = b_d = c = 1, Q_d = R_d = 1 (S = P = razão áurea)."""
    return DiscretePlant(A_d=[[1.0]], B_d=[[1.0]], C=[[1.0]], Q_d=[[1.0]], R_d=[[1.0]], T=1.0)


@pytest.fixture
def unit_weights() -> CostWeights:
    return CostWeights(W=[[1.0]], U=[[1.0]])


@pytest.fixture
def integrator():
    """ẋ = u + w, y = x + v com q = 1, r = 10⁻³."""
    return scalar_plant(a=0.0, b=1.0, c=1.0, q=1.0, r=1e-3)


@pytest.fixture
def integrator_weights() -> CostWeights:
    return CostWeights(W=[[1.0]], U=[[1e-3]])


@pytest.fixture
def quadrotor():
    return quadrotor_hover_plant()


@pytest.fixture
def quadrotor_weights() -> CostWeights:
    return CostWeights(W=np.eye(12), U=1e-2 * np.eye(4))
