"""Lyapunov solves, eigen-sum Gramian, analytic transform, oracle extrapolation.

The direct Lyapunov route is verified once against brute-force quadrature
of the defining integral (matrix exponentials on a fine grid), which
shares no code with the solver.
"""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from gridnoise.errors import (
    CriticalDamping,
    EigenvalueCollision,
    FilterResonance,
    FinitenessViolated,
    NotDiagonalizable,
    SingularSystem,
)
from gridnoise.gramian import (
    build_trl,
    gramian_spectral,
    performance_oracle,
    solve_lyapunov,
)
from gridnoise.mcsim import SimConfig, simulate_variance
from gridnoise.netgraph import Network
from gridnoise.spectral import performance_generic
from gridnoise.sysmodel import (
    AugmentedSystem,
    NoiseSpec,
    PerformanceSpec,
    SwingModel,
    build_augmented,
    q_weighted,
    scaled_laplacian,
)
from gridnoise.validate import ORACLE_EPS, random_connected_network


def gramian_quadrature(a: np.ndarray, qm: np.ndarray, horizon: float, steps: int) -> np.ndarray:
    """Brute-force Simpson quadrature of the Gramian integral.

    Samples exp(A t)^T Q exp(A t) on a uniform grid by propagating one
    per-step matrix exponential; no Lyapunov machinery involved.
    """
    import scipy.integrate

    ts = np.linspace(0.0, horizon, steps)
    e_dt = scipy.linalg.expm(a * (ts[1] - ts[0]))
    vals = np.empty((steps, *a.shape))
    cur = np.eye(a.shape[0])
    for k in range(steps):
        vals[k] = cur.T @ qm @ cur
        cur = cur @ e_dt
    return scipy.integrate.simpson(vals, x=ts, axis=0)


def random_uniform_ratio_system(rng, n_lo=2, n_hi=7):
    n = int(rng.integers(n_lo, n_hi))
    net = random_connected_network(rng, n)
    gamma = 10.0 ** rng.uniform(-0.5, 0.5)
    m = 10.0 ** rng.uniform(-0.3, 0.3, n)
    model = SwingModel(net=net, m=m, d=gamma * m)
    noise = NoiseSpec(p=rng.standard_normal(n), tau=10.0 ** rng.uniform(-0.7, 0.7))
    return model, noise


def random_projected_perf(rng, n):
    a = rng.standard_normal((n, n))
    q11 = a @ a.T / n
    pr = np.eye(n) - np.full((n, n), 1.0 / n)
    q11 = pr @ q11 @ pr
    b = rng.standard_normal((n, n))
    return PerformanceSpec(q11=0.5 * (q11 + q11.T), q22=b @ b.T / n)


class TestSolveLyapunov:
    def test_single_machine_residual(self):
        net = Network(n=1, edges=())
        model = SwingModel.uniform(net)
        aug = build_augmented(model, NoiseSpec(p=np.array([1.0]), tau=1.0), 0.01)
        qm = np.diag([0.0, 1.0, 0.0])
        sol = solve_lyapunov(aug, qm)
        assert sol.residual < 1e-10
        assert np.abs(sol.x - sol.x.T).max() < 1e-12

    def test_zero_weight_gives_zero(self, two_node):
        model = SwingModel.uniform(two_node)
        aug = build_augmented(model, NoiseSpec.single_node(2, 0, 1.0, 1.0), 0.01)
        sol = solve_lyapunov(aug, np.zeros((5, 5)))
        assert np.abs(sol.x).max() == 0.0

    def test_marginal_system_rejected(self, two_node):
        model = SwingModel.uniform(two_node)
        aug = build_augmented(model, NoiseSpec.single_node(2, 0, 1.0, 1.0), 0.0)
        with pytest.raises(SingularSystem):
            solve_lyapunov(aug, q_weighted(model, PerformanceSpec.phase_coherence(2)))

    def test_matches_quadrature_oracle(self):
        net = Network(n=1, edges=())
        model = SwingModel(net=net, m=np.array([1.0]), d=np.array([2.0]))
        aug = build_augmented(model, NoiseSpec(p=np.array([1.0]), tau=0.5), 0.8)
        qm = q_weighted(model, PerformanceSpec(q11=np.zeros((1, 1)), q22=np.eye(1)))
        direct = solve_lyapunov(aug, qm).x
        brute = gramian_quadrature(aug.a, qm, horizon=60.0, steps=12001)
        assert np.abs(direct - brute).max() < 1e-8

    def test_residual_bound_on_random_systems(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            model, noise = random_uniform_ratio_system(rng)
            qm = q_weighted(model, random_projected_perf(rng, model.net.n))
            aug = build_augmented(model, noise, 10.0 ** rng.uniform(-5, -2))
            sol = solve_lyapunov(aug, qm)
            assert sol.residual <= 1e-8 * np.abs(qm).max()


class TestGramianSpectral:
    def test_agrees_with_direct_solve(self):
        rng = np.random.default_rng(43)
        for _ in range(20):
            model, noise = random_uniform_ratio_system(rng, n_lo=4, n_hi=5)
            qm = q_weighted(model, random_projected_perf(rng, model.net.n))
            aug = build_augmented(model, noise, 0.01)
            direct = solve_lyapunov(aug, qm)
            eigsum = gramian_spectral(aug, qm)
            scale = max(np.abs(direct.x).max(), 1e-300)
            assert np.abs(direct.x - eigsum.x).max() / scale < 1e-7

    def test_zero_weight(self, two_node):
        model = SwingModel.uniform(two_node)
        aug = build_augmented(model, NoiseSpec.single_node(2, 0, 1.0, 1.0), 0.01)
        sol = gramian_spectral(aug, np.zeros((5, 5)))
        assert np.abs(sol.x).max() == 0.0

    def test_defective_matrix_detected(self):
        # hand-built critically damped block: eigenvalue -1 with a single
        # eigenvector (gamma=2, lambda=1), filter pole at -0.5
        a = np.array([[0.0, 1.0, 0.0], [-1.0, -2.0, 1.0], [0.0, 0.0, -0.5]])
        aug = AugmentedSystem(a=a, b=np.array([0.0, 0.0, 2.0]), eps=0.01, eta0=2.0)
        with pytest.raises((NotDiagonalizable, EigenvalueCollision)):
            gramian_spectral(aug, np.diag([1.0, 1.0, 0.0]))

    def test_marginal_system_rejected(self, two_node):
        model = SwingModel.uniform(two_node)
        aug = build_augmented(model, NoiseSpec.single_node(2, 0, 1.0, 1.0), 0.0)
        with pytest.raises(SingularSystem):
            gramian_spectral(aug, q_weighted(model, PerformanceSpec.phase_coherence(2)))


class TestBuildTrl:
    def test_biorthogonality(self, two_node):
        model = SwingModel.uniform(two_node)
        noise = NoiseSpec.single_node(2, 0, 1.0, 0.3)
        pair = build_trl(model, noise, 0.01)
        eye = np.eye(5)
        assert np.abs(pair.t_l @ pair.t_r - eye).max() < 1e-8
        assert np.abs(pair.t_r @ pair.t_l - eye).max() < 1e-8

    def test_diagonalizes_augmented_matrix(self, two_node):
        model = SwingModel.uniform(two_node)
        noise = NoiseSpec.single_node(2, 0, 1.0, 0.3)
        pair = build_trl(model, noise, 0.01)
        aug = build_augmented(model, noise, 0.01)
        diag = pair.t_l @ aug.a @ pair.t_r
        assert np.abs(diag - np.diag(pair.mu)).max() < 1e-8
        cost = np.abs(np.linalg.eigvals(aug.a)[:, None] - pair.mu[None, :])
        rows, cols = linear_sum_assignment(cost)
        assert cost[rows, cols].max() < 1e-8

    def test_mu_ordering_plus_minus_filter(self, two_node):
        model = SwingModel.uniform(two_node)
        tau = 0.3
        pair = build_trl(model, NoiseSpec.single_node(2, 0, 1.0, tau), 0.01)
        n = 2
        assert pair.mu[2 * n] == pytest.approx(-1.0 / tau)
        lam = np.linalg.eigvalsh(scaled_laplacian(model, 0.01))
        for j, lam_j in enumerate(lam):
            assert pair.mu[j] + pair.mu[n + j] == pytest.approx(-1.0)  # sum = -gamma
            assert pair.mu[j] * pair.mu[n + j] == pytest.approx(lam_j)

    def test_filter_resonance_detected(self):
        # tau solving lambda tau^2 - gamma tau + 1 = 0 for the second mode
        net = Network(n=2, edges=((0, 1, 0.1),))
        model = SwingModel.uniform(net)
        lam2 = 0.2
        tau = (1.0 + np.sqrt(1.0 - 4.0 * lam2)) / (2.0 * lam2)
        with pytest.raises(FilterResonance):
            build_trl(model, NoiseSpec.single_node(2, 0, 1.0, tau), 0.0)

    def test_critical_damping_detected(self):
        # single machine with eps = gamma^2/4 * m makes Gamma exactly zero
        net = Network(n=1, edges=())
        model = SwingModel(net=net, m=np.array([1.0]), d=np.array([2.0]))
        with pytest.raises(CriticalDamping):
            build_trl(model, NoiseSpec(p=np.array([1.0]), tau=0.3), 1.0)


class TestPerformanceOracle:
    def test_two_node_hand_value(self, two_node):
        model = SwingModel.uniform(two_node)
        result = performance_oracle(model, NoiseSpec.single_node(2, 0, 1.0, 1.0),
                                    PerformanceSpec.phase_coherence(2))
        assert result.value == pytest.approx(0.125, rel=1e-5)
        assert result.method == "oracle"
        assert result.diagnostics["fit_residual"] < 1e-6

    def test_identity_phase_weight_diverges(self, k3):
        model = SwingModel.uniform(k3)
        perf = PerformanceSpec(q11=np.eye(3), q22=np.zeros((3, 3)))
        with pytest.raises(FinitenessViolated):
            performance_oracle(model, NoiseSpec.single_node(3, 0, 1.0, 1.0), perf)

    def test_matches_closed_form_on_random_systems(self):
        rng = np.random.default_rng(47)
        for _ in range(10):
            model, noise = random_uniform_ratio_system(rng, n_lo=3, n_hi=8)
            perf = random_projected_perf(rng, model.net.n)
            ps = performance_generic(model, noise, perf).value
            po = performance_oracle(model, noise, perf, eps_schedule=ORACLE_EPS).value
            assert ps == pytest.approx(po, rel=1e-5)

    def test_independent_mode_superposition(self, k3):
        model = SwingModel.uniform(k3)
        perf = PerformanceSpec.phase_coherence(3)
        p = np.array([1.0, 0.0, -0.5])
        ind = performance_oracle(model, NoiseSpec(p=p, tau=0.8, mode="independent"), perf).value
        total = sum(
            performance_oracle(model, NoiseSpec.single_node(3, a, float(p[a]), 0.8), perf).value
            for a in (0, 2)
        )
        assert ind == pytest.approx(total, rel=1e-9)

    def test_non_uniform_damping_cross_checked_by_simulation(self, two_node):
        model = SwingModel(net=two_node, m=np.array([1.0, 1.0]), d=np.array([1.0, 2.0]))
        noise = NoiseSpec.single_node(2, 0, 1.0, 1.0)
        perf = PerformanceSpec.phase_coherence(2)
        oracle = performance_oracle(model, noise, perf)
        assert np.isfinite(oracle.value) and oracle.value > 0.0
        cfg = SimConfig(dt=0.01, t_burn=60.0, t_measure=4000.0, n_traj=16, seed=29)
        est = simulate_variance(model, noise, perf, cfg)
        assert abs(est.mean - oracle.value) < max(3.0 * est.stderr, 0.02 * oracle.value)

    def test_schedule_validation(self, two_node):
        model = SwingModel.uniform(two_node)
        noise = NoiseSpec.single_node(2, 0, 1.0, 1.0)
        perf = PerformanceSpec.phase_coherence(2)
        with pytest.raises(ValueError):
            performance_oracle(model, noise, perf, eps_schedule=(1e-5, 1e-4))
        with pytest.raises(ValueError):
            performance_oracle(model, noise, perf, eps_schedule=(1e-3,))
