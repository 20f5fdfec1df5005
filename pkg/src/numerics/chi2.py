"""
Distribuição χ²: CDF, função de sobrevivência e quantil.

A CDF é a gamma incompleta regularizada P(dof/2, x/2); o quantil inverte a
CDF por busca de raiz com intervalo garantido.
"""
import numpy as np
from scipy import optimize, special

from ..exceptions import DomainError


def _check_dof(dof: int) -> int:
    if int(dof) != dof or dof < 1:
        raise DomainError(f"graus de liberdade devem ser inteiro >= 1, recebido {dof}")
    return int(dof)


def chi2_cdf(dof: int, x: float) -> float:
    """P(dof/2, x/2). Levanta DomainError para x < 0."""
    dof = _check_dof(dof)
    if not np.isfinite(x) or x < 0:
        raise DomainError(f"x deve ser finito e >= 0, recebido {x}")
    return float(special.gammainc(dof / 2.0, x / 2.0))


def chi2_sf(dof: int, x):
    """1 − CDF; aceita escalar ou array (usado nos p-valores por passo)."""
    dof = _check_dof(dof)
    values = np.asarray(x, dtype=float)
    if np.any(values < 0):
        raise DomainError("x deve ser >= 0")
    result = special.gammaincc(dof / 2.0, values / 2.0)
    return float(result) if result.ndim == 0 else result


def chi2_quantile(dof: int, prob: float) -> float:
    """
    x tal que CDF_{χ²(dof)}(x) = prob.

    Raises:
        DomainError: prob fora de (0, 1)
    """
    dof = _check_dof(dof)
    if not (0.0 < prob < 1.0):
        raise DomainError(f"probabilidade deve estar em (0,1), recebido {prob}")

    hi = float(max(dof, 1))
    while special.gammainc(dof / 2.0, hi / 2.0) < prob:
        hi *= 2.0

    return float(
        optimize.brentq(
            lambda x: special.gammainc(dof / 2.0, x / 2.0) - prob,
            0.0,
            hi,
            xtol=1e-13,
            rtol=4 * np.finfo(float).eps,
            maxiter=500,
        )
    )
