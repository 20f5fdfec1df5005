"""
Hierarquia de erros do toolkit de watermarking.

Cada erro carrega o código de saída usado pela CLI:
1 para erros de validação/configuração, 2 para falhas numéricas.
"""
from typing import Optional


class WatermarkingError(Exception):
    """Erro base do projeto."""

    exit_code: int = 2
    kind: str = "error"


class ConfigurationError(WatermarkingError, ValueError):
    """Configuração inválida (cenário, flags ou janela de ataque)."""

    exit_code = 1
    kind = "validation"

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class NumericalError(WatermarkingError):
    """Falha numérica (não convergência, instabilidade, mal condicionamento)."""

    exit_code = 2
    kind = "numerical"


class DimensionError(NumericalError, ValueError):
    """Dimensões incompatíveis entre matrizes."""


class DomainError(NumericalError, ValueError):
    """Argumento fora do domínio da operação."""


class ConvergenceError(NumericalError):
    """Iteração não convergiu dentro do limite."""

    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (resíduo={residual:.3e}, iterações={iterations})")


class StabilityError(NumericalError):
    """Raio espectral >= 1 onde a operação exige estabilidade."""

    def __init__(self, message: str, spectral_radius: float):
        self.spectral_radius = spectral_radius
        super().__init__(f"{message} (raio espectral={spectral_radius:.6f})")


class ConditioningError(NumericalError):
    """Matriz singular/mal condicionada."""
