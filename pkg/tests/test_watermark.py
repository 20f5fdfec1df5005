"""
Testes do projeto do watermark: fórmulas fechadas, otimalidade, escala e varredura em T.
"""
import numpy as np
import pytest

from src.control import ClosedLoopDesign, CostWeights, classify_A_script, synthesize
from src.exceptions import ConfigurationError, DomainError, StabilityError
from src.plant import DiscretePlant, discretize, scalar_plant
from src.watermark import (
    STATUS_OK,
    cost_increase,
    detection_sensitivity,
    evaluate_watermark,
    expected_shift,
    golden_section_refine,
    optimize_watermark_fixed_T,
    scaled_watermark,
    small_T_shift_approx,
    steady_watermark_covariance,
    sweep_sampling_period,
    zero_watermark,
)

from .conftest import GOLDEN

GRID = [0.01, 0.02, 0.04, 0.07, 0.10, 0.15]


def _random_feasible(rng, N, budget, p):
    G = rng.standard_normal((p, p))
    Q = G @ G.T
    return budget * Q / np.trace(N @ Q)


def _random_stable_instance(rng):
    """Planta discreta aleatória (n ≤ 6, p ≤ 3) cuja malha fechada 𝒜 é estável."""
    while True:
        n = int(rng.integers(1, 7))
        p = int(rng.integers(1, 4))
        m = int(rng.integers(1, 4))
        A = rng.standard_normal((n, n))
        A = 0.95 * A / max(np.max(np.abs(np.linalg.eigvals(A))), 1e-12)
        G = rng.standard_normal((n, n))
        plant = DiscretePlant(
            A_d=A, B_d=rng.standard_normal((n, p)), C=rng.standard_normal((m, n)),
            Q_d=G @ G.T + 0.1 * np.eye(n), R_d=np.eye(m), T=0.1,
        )
        weights = CostWeights(W=np.eye(n), U=np.eye(p))
        design = synthesize(plant, weights)
        if classify_A_script(design).stable:
            return plant, design, weights


# =============================================================================
# FÓRMULAS FECHADAS
# =============================================================================

def test_expected_shift_scalar_example():
    """𝒜 = 0.5, B_d = C = 𝒫 = 1, 𝒬 = 0.5 → 𝒰 = 2/3 e E[Δg] = 4/3 com 𝒯 = 1."""
    design = ClosedLoopDesign(
        K=np.zeros((1, 1)), P=np.eye(1), L=np.zeros((1, 1)), S=np.eye(1),
        resid_cov=np.eye(1), closed_loop=np.array([[0.5]]), nominal_cost=0.0, C=np.eye(1),
    )
    plant = DiscretePlant(A_d=[[0.5]], B_d=[[1.0]], C=[[1.0]], Q_d=[[1.0]], R_d=[[1.0]], T=1.0)
    U = steady_watermark_covariance(design, plant, np.array([[0.5]]))
    assert U[0, 0] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert expected_shift(design, U, 1) == pytest.approx(4.0 / 3.0, abs=1e-12)


def test_expected_shift_zero_and_window_validation(golden_plant, unit_weights):
    design = synthesize(golden_plant, unit_weights)
    assert expected_shift(design, np.zeros((1, 1)), 10) == 0.0
    with pytest.raises(DomainError):
        expected_shift(design, np.zeros((1, 1)), 0)


def test_cost_increase_scalar():
    """U = 1, B_dᵀSB_d = 2, 𝒬 = 0.5 → ΔJ = 1.5."""
    plant = DiscretePlant(A_d=[[0.5]], B_d=[[1.0]], C=[[1.0]], Q_d=[[1.0]], R_d=[[1.0]], T=1.0)
    weights = CostWeights(W=[[1.0]], U=[[1.0]])
    assert cost_increase(plant, np.array([[2.0]]), weights, np.array([[0.5]])) == pytest.approx(1.5)
    assert cost_increase(plant, np.array([[2.0]]), weights, np.zeros((1, 1))) == 0.0


def test_small_T_approx_substitution():
    """C = 1, R = 1, 𝒰 = 1, 𝒯 = 5, T = 0.01 → 0.1; 𝒰 = 0 → 0."""
    cont = scalar_plant(a=0.0, b=1.0, c=1.0, q=1.0, r=1.0)
    assert small_T_shift_approx(cont, None, np.eye(1), 5, 0.01) == pytest.approx(0.1)
    assert small_T_shift_approx(cont, None, np.zeros((1, 1)), 5, 0.01) == 0.0


def test_small_T_approx_validates_period(quadrotor):
    with pytest.raises(DomainError):
        small_T_shift_approx(quadrotor, None, np.zeros((12, 12)), 10, 0.0)


# =============================================================================
# OTIMIZAÇÃO EM T FIXO
# =============================================================================

def test_golden_ratio_optimum(golden_plant, unit_weights):
    """N = 1 + φ, q* = μ/N, 𝒰 = q*/(1 − 𝒜²), E[Δg] = 2𝒰/𝒫·𝒯."""
    design = synthesize(golden_plant, unit_weights)
    wm = optimize_watermark_fixed_T(golden_plant, design, unit_weights, budget_mu=1.0, window=10)
    N = 1.0 + GOLDEN
    q_star = 1.0 / N
    a_cl = (1.0 - 1.0 / GOLDEN) ** 2
    U = q_star / (1.0 - a_cl ** 2)
    assert wm.cov_Q[0, 0] == pytest.approx(q_star, abs=1e-9)
    assert wm.steady_U[0, 0] == pytest.approx(U, abs=1e-9)
    assert wm.expected_shift == pytest.approx(2.0 * U / N * 10, abs=1e-9)
    assert wm.cost_increase == pytest.approx(1.0, abs=1e-9)
    assert wm.window == 10


def test_budget_validation(golden_plant, unit_weights):
    design = synthesize(golden_plant, unit_weights)
    for mu in (0.0, -1.0, float("inf")):
        with pytest.raises(DomainError):
            optimize_watermark_fixed_T(golden_plant, design, unit_weights, mu)


def test_unstable_closed_loop_raises(golden_plant, unit_weights):
    design = synthesize(golden_plant, unit_weights)
    unstable = ClosedLoopDesign(
        K=design.K, P=design.P, L=design.L, S=design.S, resid_cov=design.resid_cov,
        closed_loop=np.array([[1.2]]), nominal_cost=design.nominal_cost, C=design.C,
    )
    with pytest.raises(StabilityError):
        optimize_watermark_fixed_T(golden_plant, unstable, unit_weights, 1.0)


def test_degenerate_input_gives_zero_watermark(unit_weights, captured_warnings):
    """B_d = 0: o watermark não entra na malha; 𝒬* = 0 com aviso."""
    plant = DiscretePlant(A_d=[[0.5]], B_d=[[0.0]], C=[[1.0]], Q_d=[[1.0]], R_d=[[1.0]], T=1.0)
    design = synthesize(plant, unit_weights)
    wm = optimize_watermark_fixed_T(plant, design, unit_weights, 1.0)
    assert wm.is_zero
    assert wm.expected_shift == 0.0
    assert any("M ≈ 0" in message for message in captured_warnings)


@pytest.mark.parametrize("T", [0.05, 0.1])
def test_quadrotor_optimum_properties(quadrotor, quadrotor_weights, T):
    plant = discretize(quadrotor, T)
    design = synthesize(plant, quadrotor_weights)
    mu = 1.0
    wm = optimize_watermark_fixed_T(plant, design, quadrotor_weights, mu)

    eig = np.linalg.eigvalsh(wm.cov_Q)
    assert eig.min() >= -1e-12 * eig.max()
    assert np.linalg.matrix_rank(wm.cov_Q, tol=1e-9 * eig.max()) == 1
    assert wm.cost_increase == pytest.approx(mu, rel=1e-9)

    # 𝒰 resolve a Lyapunov
    A_cl = design.closed_loop
    residual = wm.steady_U - A_cl @ wm.steady_U @ A_cl.T - plant.B_d @ wm.cov_Q @ plant.B_d.T
    assert np.abs(residual).max() < 1e-10 * (1.0 + np.abs(wm.steady_U).max())


def test_duality_of_objective(quadrotor, quadrotor_weights):
    """tr(M𝒬) = tr(Cᵀ𝒫⁻¹C𝒰) para 𝒬 qualquer."""
    plant = discretize(quadrotor, 0.07)
    design = synthesize(plant, quadrotor_weights)
    M = detection_sensitivity(design, plant)
    rng = np.random.default_rng(13)
    for _ in range(3):
        G = rng.standard_normal((4, 4))
        Q = G @ G.T
        U = steady_watermark_covariance(design, plant, Q)
        lhs = np.trace(M @ Q)
        rhs = np.trace(np.linalg.solve(design.resid_cov, plant.C @ U @ plant.C.T))
        assert lhs == pytest.approx(rhs, rel=1e-8)


@pytest.mark.parametrize("fixture_name", ["golden", "quadrotor"])
def test_optimum_dominates_random_feasible(fixture_name, golden_plant, unit_weights, quadrotor, quadrotor_weights):
    if fixture_name == "golden":
        plant, weights = golden_plant, unit_weights
    else:
        plant, weights = discretize(quadrotor, 0.1), quadrotor_weights
    design = synthesize(plant, weights)
    mu = 2.0
    wm = optimize_watermark_fixed_T(plant, design, weights, mu)
    N = weights.U + plant.B_d.T @ design.S @ plant.B_d

    rng = np.random.default_rng(17)
    for _ in range(20):
        Q = _random_feasible(rng, N, mu, plant.p)
        other = evaluate_watermark(plant, design, weights, Q, wm.window)
        assert other.cost_increase == pytest.approx(mu, rel=1e-9)
        assert other.expected_shift <= wm.expected_shift * (1.0 + 1e-9)


def test_optimum_dominates_random_feasible_on_random_instances():
    rng = np.random.default_rng(29)
    mu, window, samples = 1.0, 10, 10_000
    for _ in range(20):
        plant, design, weights = _random_stable_instance(rng)
        wm = optimize_watermark_fixed_T(plant, design, weights, mu, window)
        M = detection_sensitivity(design, plant)
        N = weights.U + plant.B_d.T @ design.S @ plant.B_d

        G = rng.standard_normal((samples, plant.p, plant.p))
        Q = G @ np.swapaxes(G, 1, 2)
        budget = np.einsum('ij,sji->s', N, Q)
        shifts = 2.0 * window * mu * np.einsum('ij,sji->s', M, Q) / budget
        best = 2.0 * window * float(np.trace(M @ wm.cov_Q))
        assert best == pytest.approx(wm.expected_shift, rel=1e-8)
        assert wm.cost_increase == pytest.approx(mu, rel=1e-9)
        assert shifts.max() <= best * (1.0 + 1e-9)


def test_scalar_optimizer_example(unit_weights):
    """𝒜 = 0.5, N = U + B_dᵀSB_d = 2, 𝒫 = 1, μ = 1, 𝒯 = 1 → q* = 0.5, 𝒰 = 2/3, E[Δg] = 4/3."""
    design = ClosedLoopDesign(
        K=np.zeros((1, 1)), P=np.eye(1), L=np.zeros((1, 1)), S=np.eye(1),
        resid_cov=np.eye(1), closed_loop=np.array([[0.5]]), nominal_cost=0.0, C=np.eye(1),
    )
    plant = DiscretePlant(A_d=[[0.5]], B_d=[[1.0]], C=[[1.0]], Q_d=[[1.0]], R_d=[[1.0]], T=1.0)
    wm = optimize_watermark_fixed_T(plant, design, unit_weights, budget_mu=1.0, window=1)
    assert wm.cov_Q[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert wm.steady_U[0, 0] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert wm.expected_shift == pytest.approx(4.0 / 3.0, abs=1e-12)
    assert wm.cost_increase == pytest.approx(1.0, abs=1e-12)


def test_shift_and_cost_scale_linearly_with_budget(golden_plant, unit_weights):
    design = synthesize(golden_plant, unit_weights)
    one = optimize_watermark_fixed_T(golden_plant, design, unit_weights, 1.0)
    three = optimize_watermark_fixed_T(golden_plant, design, unit_weights, 3.0)
    assert three.expected_shift == pytest.approx(3.0 * one.expected_shift, rel=1e-10)
    assert three.cost_increase == pytest.approx(3.0 * one.cost_increase, rel=1e-10)

    doubled = scaled_watermark(one, 2.0, golden_plant, design, unit_weights)
    assert doubled.expected_shift == pytest.approx(2.0 * one.expected_shift, rel=1e-10)
    with pytest.raises(DomainError):
        scaled_watermark(one, -1.0, golden_plant, design, unit_weights)


def test_zero_watermark_baseline(golden_plant, unit_weights):
    design = synthesize(golden_plant, unit_weights)
    wm = zero_watermark(golden_plant, design, unit_weights, window=5)
    assert wm.is_zero
    assert wm.expected_shift == 0.0
    assert wm.cost_increase == 0.0
    assert wm.window == 5


# =============================================================================
# PERÍODO DE AMOSTRAGEM
# =============================================================================

def test_integrator_sweep_interior_optimum(integrator, integrator_weights):
    result = sweep_sampling_period(integrator, integrator_weights, GRID, 0.15, budget_mu=0.01, window=10)
    assert len(result.rows) == len(GRID)
    assert all(row.status == STATUS_OK for row in result.rows)
    assert result.argmax_T == pytest.approx(0.07)

    frame = result.to_frame()
    assert list(frame.columns[:6]) == [
        'T', 'expected_shift', 'cost_increase', 'nominal_cost', 'spectral_radius', 'status',
    ]
    assert frame['is_argmax'].sum() == 1
    assert frame.loc[frame['is_argmax'], 'T'].iloc[0] == pytest.approx(0.07)
    # μ·2𝒯·T³/(P⁴(1 − (1 − T/P)⁴)) com P = (T + √(T² + 4r))/2
    assert result.best_row.expected_shift == pytest.approx(0.01 * 20 * 7.527, rel=2e-3)
    assert np.all(np.diff(frame['nominal_cost'].to_numpy()) > 0)


def test_integrator_nominal_cost_closed_form(integrator, integrator_weights):
    """J(T) = (TP + 2r)/√(T² + 4r) + P − T."""
    r = 1e-3
    for T in GRID:
        design = synthesize(discretize(integrator, T), integrator_weights)
        P = (T + np.sqrt(T * T + 4 * r)) / 2.0
        J = (T * P + 2 * r) / np.sqrt(T * T + 4 * r) + P - T
        assert design.nominal_cost == pytest.approx(J, rel=1e-8)


def test_sweep_refinement_stays_between_neighbours(integrator, integrator_weights):
    result = sweep_sampling_period(
        integrator, integrator_weights, GRID, 0.15, budget_mu=0.01, refine=True
    )
    assert 0.04 < result.argmax_T < 0.10
    grid_best = max(row.expected_shift for row in result.rows if not row.is_refinement)
    assert result.best_row.expected_shift >= grid_best
    refinements = [row for row in result.rows if row.is_refinement]
    assert len(refinements) <= 1


def test_single_point_grid(integrator, integrator_weights):
    result = sweep_sampling_period(integrator, integrator_weights, [0.05], 0.15, budget_mu=0.01)
    assert len(result.rows) == 1
    assert result.argmax_T == 0.05
    assert bool(result.to_frame()['is_argmax'].iloc[0])


def test_sweep_validation(integrator, integrator_weights):
    with pytest.raises(ConfigurationError):
        sweep_sampling_period(integrator, integrator_weights, [], 0.15, 0.01)
    with pytest.raises(ConfigurationError):
        sweep_sampling_period(integrator, integrator_weights, [0.2], 0.15, 0.01)
    with pytest.raises(ConfigurationError):
        sweep_sampling_period(integrator, integrator_weights, [0.1], 0.15, 0.0)


def test_sweep_uses_same_budget_everywhere(quadrotor, quadrotor_weights):
    result = sweep_sampling_period(quadrotor, quadrotor_weights, GRID, 0.15, budget_mu=0.5)
    for row in result.rows:
        if row.ok:
            assert row.cost_increase == pytest.approx(0.5, rel=1e-8)
    assert result.argmax_T in GRID


def test_quadrotor_sweep_shape(quadrotor, quadrotor_weights):
    """Parâmetros padrão: deslocamento crescente na grade, melhor T na borda 0.15."""
    result = sweep_sampling_period(quadrotor, quadrotor_weights, GRID, 0.15, budget_mu=1.0)
    assert all(row.ok for row in result.rows)
    shifts = [row.expected_shift for row in result.rows]
    assert np.all(np.diff(shifts) > 0)
    np.testing.assert_allclose(shifts, [0.053, 0.210, 0.820, 2.42, 4.76, 10.08], rtol=0.03)
    assert result.argmax_T == 0.15

    nominal = [row.nominal_cost for row in result.rows]
    assert np.all(np.diff(nominal) > 0)


def test_golden_section_on_parabola():
    x, fx = golden_section_refine(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, tol=1e-8)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert fx == pytest.approx(0.0, abs=1e-10)


# =============================================================================
# LIMITE T → 0
# =============================================================================

@pytest.mark.slow
def test_small_period_shift_vanishes(quadrotor, quadrotor_weights):
    shifts = []
    for T in (1e-2, 1e-3, 1e-4):
        plant = discretize(quadrotor, T)
        design = synthesize(plant, quadrotor_weights)
        shifts.append(optimize_watermark_fixed_T(plant, design, quadrotor_weights, 1.0).expected_shift)
    assert shifts[0] > shifts[1] > shifts[2]


@pytest.mark.slow
def test_small_period_linearized_form(quadrotor, quadrotor_weights):
    T = 1e-3
    plant = discretize(quadrotor, T)
    design = synthesize(plant, quadrotor_weights)
    wm = optimize_watermark_fixed_T(plant, design, quadrotor_weights, 1.0)
    approx = small_T_shift_approx(quadrotor, design, wm.steady_U, wm.window, T)
    assert approx == pytest.approx(wm.expected_shift, rel=0.05)
