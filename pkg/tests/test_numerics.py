"""
Testes dos kernels numéricos: ZOH, Riccati, Lyapunov, autoproblema generalizado e χ².
"""
import numpy as np
import pytest
from scipy import linalg as sla
from scipy import stats

from src.exceptions import (
    ConditioningError,
    ConvergenceError,
    DimensionError,
    DomainError,
    StabilityError,
)
from src.numerics import (
    as_matrix,
    as_symmetric_psd,
    chi2_cdf,
    chi2_quantile,
    chi2_sf,
    dare_residual,
    generalized_symmetric_eig_max,
    mat_exp,
    psd_sqrt,
    solve_dare,
    solve_dlyap,
    spectral_radius,
    zoh_pair,
    zoh_process_noise,
)
from src.plant import discretize, quadrotor_hover_plant

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def _random_stable(rng, n, radius=0.9):
    M = rng.standard_normal((n, n))
    return radius * M / spectral_radius(M)


def _midpoint_oracle(A, B, Q, T, points=20000):
    """∫₀ᵀ e^{As} ds·B e ∫₀ᵀ e^{As} Q e^{Aᵀs} ds pela regra do ponto médio."""
    h = T / points
    step = sla.expm(A * h)
    current = sla.expm(A * h / 2.0)
    gamma = np.zeros_like(B)
    q_int = np.zeros_like(Q)
    for _ in range(points):
        gamma += current @ B * h
        q_int += current @ Q @ current.T * h
        current = step @ current
    return gamma, q_int


# =============================================================================
# TIPOS DE DOMÍNIO
# =============================================================================

def test_as_matrix_promotes_scalar_and_freezes():
    M = as_matrix(2.5)
    assert M.shape == (1, 1)
    assert not M.flags.writeable


def test_as_matrix_rejects_vectors_and_nan():
    with pytest.raises(DimensionError):
        as_matrix([1.0, 2.0])
    with pytest.raises(DomainError):
        as_matrix([[np.nan]])


def test_as_symmetric_psd_rejects_asymmetry():
    with pytest.raises(DomainError):
        as_symmetric_psd([[1.0, 0.5], [0.0, 1.0]])


def test_as_symmetric_psd_clips_small_negative_eigenvalue(captured_warnings):
    M = as_symmetric_psd([[1.0, 0.0], [0.0, -1e-6]])
    assert np.linalg.eigvalsh(M).min() >= 0.0
    assert any("recortando" in message for message in captured_warnings)


def test_as_symmetric_psd_without_clip_raises():
    with pytest.raises(DomainError):
        as_symmetric_psd([[1.0, 0.0], [0.0, -1e-6]], clip=False)


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((4, 4))
    X = X @ X.T
    R = psd_sqrt(X)
    np.testing.assert_allclose(R @ R, X, atol=1e-10)


# =============================================================================
# EXPONENCIAL E ZOH
# =============================================================================

def test_mat_exp_zero_is_identity():
    np.testing.assert_allclose(mat_exp(np.zeros((3, 3))), np.eye(3))


def test_mat_exp_semigroup():
    rng = np.random.default_rng(11)
    M = rng.standard_normal((5, 5))
    for s, t in [(0.1, 0.3), (0.7, 0.05), (1.0, 1.0)]:
        np.testing.assert_allclose(
            mat_exp(M, s) @ mat_exp(M, t), mat_exp(M, s + t), rtol=1e-10, atol=1e-12
        )


def test_mat_exp_rejects_non_square():
    with pytest.raises(DimensionError):
        mat_exp(np.zeros((2, 3)))


def test_zoh_pair_double_integrator():
    """T = 0.5: A_d = [[1, 0.5], [0, 1]], B_d = [[0.125], [0.5]]."""
    A_d, B_d = zoh_pair([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]], 0.5)
    np.testing.assert_allclose(A_d, [[1.0, 0.5], [0.0, 1.0]], atol=1e-14)
    np.testing.assert_allclose(B_d, [[0.125], [0.5]], atol=1e-14)


def test_zoh_pair_scalar_decay():
    A_d, B_d = zoh_pair([[-1.0]], [[1.0]], 1.0)
    assert A_d[0, 0] == pytest.approx(np.exp(-1.0), rel=1e-14)
    assert B_d[0, 0] == pytest.approx(1.0 - np.exp(-1.0), rel=1e-13)


def test_zoh_pair_rejects_non_positive_period():
    with pytest.raises(DomainError):
        zoh_pair([[0.0]], [[1.0]], 0.0)


def test_zoh_process_noise_scalar():
    """a = −1, Q = 2, T = 1 → Q_d = 1 − e⁻²."""
    Q_d = zoh_process_noise([[-1.0]], [[2.0]], 1.0)
    assert Q_d[0, 0] == pytest.approx(0.864664716, rel=1e-9)


def test_zoh_process_noise_integrator_is_linear_in_T():
    Q_d = zoh_process_noise([[0.0]], [[3.0]], 0.2)
    assert Q_d[0, 0] == pytest.approx(0.6, rel=1e-13)


def test_zoh_matches_quadrature_oracle():
    rng = np.random.default_rng(11)
    for n in (2, 4, 6):
        A = rng.standard_normal((n, n)) / np.sqrt(n)
        B = rng.standard_normal((n, 2))
        G = rng.standard_normal((n, n))
        Q = G @ G.T
        T = 0.7
        _, B_d = zoh_pair(A, B, T)
        Q_d = zoh_process_noise(A, Q, T)
        gamma, q_int = _midpoint_oracle(A, B, Q, T)
        assert np.linalg.norm(B_d - gamma) / np.linalg.norm(gamma) < 1e-8
        assert np.linalg.norm(Q_d - q_int) / np.linalg.norm(q_int) < 1e-8


# =============================================================================
# RICCATI E LYAPUNOV
# =============================================================================

def test_solve_dare_golden_ratio():
    S = solve_dare([[1.0]], [[1.0]], [[1.0]], [[1.0]])
    assert S[0, 0] == pytest.approx(GOLDEN, abs=1e-9)


def test_solve_dare_without_input_is_lyapunov_sum():
    """a = 0.5, b = 0 → S = 1/(1 − 0.25)."""
    S = solve_dare([[0.5]], [[0.0]], [[1.0]], [[1.0]])
    assert S[0, 0] == pytest.approx(4.0 / 3.0, abs=1e-10)


def test_solve_dare_matches_scipy_and_stabilizes():
    rng = np.random.default_rng(5)
    n, p = 5, 2
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, p))
    W = np.eye(n)
    U = 0.5 * np.eye(p)
    S = solve_dare(A, B, W, U)
    reference = sla.solve_discrete_are(A, B, W, U)
    np.testing.assert_allclose(S, reference, rtol=1e-7, atol=1e-8)
    assert dare_residual(A, B, W, U, S) < 1e-8 * (1.0 + np.linalg.norm(S, np.inf))

    L = -np.linalg.solve(B.T @ S @ B + U, B.T @ S @ A)
    assert spectral_radius(A + B @ L) < 1.0


def test_solve_dare_refines_when_doubling_stalls():
    """Quadrotor em T = 0.15 com U quase singular: a duplicação sozinha para acima da tolerância."""
    plant = discretize(quadrotor_hover_plant(), 0.15)
    W = np.eye(12)
    U = 1e-6 * np.eye(4)
    S = solve_dare(plant.A_d, plant.B_d, W, U)
    reference = sla.solve_discrete_are(plant.A_d, plant.B_d, W, U)
    residual = dare_residual(plant.A_d, plant.B_d, W, U, S)
    assert residual < 1e-10 * (1.0 + np.linalg.norm(S, np.inf))
    np.testing.assert_allclose(S, reference, rtol=1e-6, atol=1e-6 * np.linalg.norm(reference))


def test_solve_dare_iteration_cap():
    rng = np.random.default_rng(8)
    A = 1.5 * np.eye(3) + 0.1 * rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 1))
    with pytest.raises(ConvergenceError) as exc_info:
        solve_dare(A, B, np.eye(3), np.eye(1), max_iter=1)
    assert exc_info.value.iterations >= 1
    assert np.isfinite(exc_info.value.residual)


def test_solve_dare_dimension_mismatch():
    with pytest.raises(DimensionError):
        solve_dare(np.eye(2), np.ones((3, 1)), np.eye(2), np.eye(1))


def test_solve_dlyap_scalar_series():
    X = solve_dlyap([[0.5]], [[1.0]])
    assert X[0, 0] == pytest.approx(4.0 / 3.0, abs=1e-12)


def test_solve_dlyap_residual_small():
    rng = np.random.default_rng(2)
    M = _random_stable(rng, 6, radius=0.95)
    G = rng.standard_normal((6, 6))
    N = G @ G.T
    X = solve_dlyap(M, N)
    assert np.linalg.norm(X - M @ X @ M.T - N, np.inf) < 1e-10 * (1.0 + np.linalg.norm(X, np.inf))


def test_solve_dlyap_matches_truncated_series():
    rng = np.random.default_rng(4)
    M = _random_stable(rng, 4, radius=0.8)
    G = rng.standard_normal((4, 4))
    N = G @ G.T
    series = np.zeros_like(N)
    power = np.eye(4)
    for _ in range(201):
        series += power @ N @ power.T
        power = M @ power
    np.testing.assert_allclose(solve_dlyap(M, N), series, rtol=1e-9, atol=1e-9)


def test_solve_dlyap_unstable_raises():
    with pytest.raises(StabilityError) as exc_info:
        solve_dlyap([[1.0]], [[1.0]])
    assert exc_info.value.spectral_radius == pytest.approx(1.0)


# =============================================================================
# AUTOPROBLEMA GENERALIZADO
# =============================================================================

def test_generalized_eig_diagonal():
    value, v = generalized_symmetric_eig_max(np.diag([3.0, 1.0]), np.diag([1.0, 2.0]))
    assert value == pytest.approx(3.0)
    np.testing.assert_allclose(v, [1.0, 0.0], atol=1e-12)


def test_generalized_eig_properties():
    rng = np.random.default_rng(4)
    G = rng.standard_normal((4, 4))
    H = rng.standard_normal((4, 4))
    M = G @ G.T
    N = H @ H.T + np.eye(4)
    value, v = generalized_symmetric_eig_max(M, N)
    np.testing.assert_allclose(M @ v, value * N @ v, atol=1e-9)
    assert float(v @ N @ v) == pytest.approx(1.0, abs=1e-12)
    assert value == pytest.approx(sla.eigh(M, N, eigvals_only=True).max(), rel=1e-10)


def test_generalized_eig_singular_N():
    with pytest.raises(ConditioningError):
        generalized_symmetric_eig_max(np.eye(2), np.diag([1.0, 0.0]))


# =============================================================================
# χ²
# =============================================================================

def test_chi2_median_one_dof():
    assert chi2_quantile(1, 0.5) == pytest.approx(0.454936423, rel=1e-8)


@pytest.mark.parametrize("dof", [1, 4, 10, 40])
@pytest.mark.parametrize("prob", [0.01, 0.5, 0.95, 0.999])
def test_chi2_quantile_inverts_cdf(dof, prob):
    x = chi2_quantile(dof, prob)
    assert chi2_cdf(dof, x) == pytest.approx(prob, abs=1e-6)
    assert x == pytest.approx(stats.chi2.ppf(prob, dof), rel=1e-8)


def test_chi2_sf_vectorized():
    x = np.array([0.0, 5.0, 18.3])
    np.testing.assert_allclose(chi2_sf(10, x), stats.chi2.sf(x, 10), rtol=1e-12)
    assert chi2_sf(10, 0.0) == pytest.approx(1.0)


def test_chi2_domain_errors():
    with pytest.raises(DomainError):
        chi2_cdf(3, -1.0)
    with pytest.raises(DomainError):
        chi2_quantile(3, 1.0)
    with pytest.raises(DomainError):
        chi2_quantile(0, 0.5)
