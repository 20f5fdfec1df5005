"""
Configurações de execução carregadas de variáveis de ambiente.
Valores podem ser definidos em um arquivo .env na raiz do projeto.
"""
import os
from typing import Optional

from dotenv import load_dotenv
from loguru import logger

# Carregar variáveis de ambiente do arquivo .env
load_dotenv()


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ("1", "true", "yes", "on")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return int(raw.strip())
    except ValueError:
        logger.warning(f"{name} inválido ({raw!r}), usando {default}")
        return default


class RuntimeConfig:
    """Parâmetros de processo (não fazem parte do cenário)."""

    def __init__(self):
        self.log_level = os.getenv("WATERMARK_LOG_LEVEL", "INFO").upper()
        self.workers = _env_int("WATERMARK_WORKERS", min(4, os.cpu_count() or 1))
        self.show_progress = _env_bool("WATERMARK_SHOW_PROGRESS", False)
        self.chunk_trials = _env_int("WATERMARK_CHUNK_TRIALS", 64)
        self.dare_max_iter = _env_int("WATERMARK_DARE_MAX_ITER", 100000)

        if self.workers < 1:
            logger.warning(f"WATERMARK_WORKERS inválido ({self.workers}), usando 1")
            self.workers = 1
        if self.chunk_trials < 1:
            logger.warning(f"WATERMARK_CHUNK_TRIALS inválido ({self.chunk_trials}), usando 64")
            self.chunk_trials = 64

    def as_dict(self) -> dict:
        return {
            "log_level": self.log_level,
            "workers": self.workers,
            "show_progress": self.show_progress,
            "chunk_trials": self.chunk_trials,
            "dare_max_iter": self.dare_max_iter,
        }


# Configuração global (singleton pattern)
_runtime: Optional[RuntimeConfig] = None


def get_runtime_config() -> RuntimeConfig:
    """
    Retorna a configuração de execução (singleton).

    Returns:
        RuntimeConfig carregada do ambiente
    """
    global _runtime

    if _runtime is None:
        _runtime = RuntimeConfig()
        logger.debug(f"Runtime config: {_runtime.as_dict()}")

    return _runtime


def reset_runtime_config() -> None:
    """Descarta o singleton (usado quando o ambiente muda, p.ex. em testes)."""
    global _runtime
    _runtime = None
