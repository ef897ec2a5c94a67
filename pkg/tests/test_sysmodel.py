"""System model, augmented state space, weight assembly, parameter parsing."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from gridnoise.errors import NetworkFormatError, NonUniformRatio
from gridnoise.netgraph import Network
from gridnoise.spectral import mode_eigenvalues
from gridnoise.sysmodel import (
    NoiseSpec,
    PerformanceSpec,
    SwingModel,
    build_augmented,
    finiteness_residual,
    load_node_params,
    q_weighted,
    scaled_laplacian,
    uniform_ratio,
)
from gridnoise.validate import random_connected_network


def multiset_gap(a: np.ndarray, b: np.ndarray) -> float:
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


@pytest.fixture
def model2(two_node) -> SwingModel:
    return SwingModel.uniform(two_node)


class TestScaledLaplacian:
    def test_identity_mass(self, model2):
        assert np.array_equal(scaled_laplacian(model2, 0.0), [[1.0, -1.0], [-1.0, 1.0]])

    def test_heavy_node(self, two_node):
        model = SwingModel(net=two_node, m=np.array([4.0, 1.0]), d=np.array([1.0, 1.0]))
        expected = np.array([[0.25, -0.5], [-0.5, 1.0]])
        assert np.abs(scaled_laplacian(model, 0.0) - expected).max() < 1e-15

    def test_regularization_shifts_diagonal(self, two_node):
        model = SwingModel(net=two_node, m=np.array([2.0, 0.5]), d=np.array([1.0, 1.0]))
        bare = scaled_laplacian(model, 0.0)
        reg = scaled_laplacian(model, 0.01)
        shift = np.diag(reg - bare)
        assert shift == pytest.approx([0.01 / 2.0, 0.01 / 0.5], rel=1e-12)
        assert np.abs((reg - bare) - np.diag(shift)).max() == 0.0

    def test_negative_eps_rejected(self, model2):
        with pytest.raises(ValueError):
            scaled_laplacian(model2, -1e-3)


class TestUniformRatio:
    def test_uniform(self, two_node):
        model = SwingModel(net=two_node, m=np.array([1.0, 1.0]), d=np.array([0.5, 0.5]))
        assert uniform_ratio(model) == 0.5

    def test_proportional_vectors(self, two_node):
        model = SwingModel(net=two_node, m=np.array([2.0, 4.0]), d=np.array([1.0, 2.0]))
        assert uniform_ratio(model) == 0.5

    def test_non_uniform_raises_with_spread(self, two_node):
        model = SwingModel(net=two_node, m=np.array([1.0, 1.0]), d=np.array([1.0, 2.0]))
        with pytest.raises(NonUniformRatio) as err:
            uniform_ratio(model)
        assert err.value.spread > 0.3


class TestBuildAugmented:
    def test_single_machine_matrix(self):
        net = Network(n=1, edges=())
        model = SwingModel.uniform(net)
        aug = build_augmented(model, NoiseSpec(p=np.array([1.0]), tau=1.0), 0.0)
        assert np.array_equal(aug.a, [[0.0, 1.0, 0.0], [0.0, -1.0, 1.0], [0.0, 0.0, -1.0]])
        assert aug.b == pytest.approx([0.0, 0.0, np.sqrt(2.0)])
        assert aug.eta0 == pytest.approx(np.sqrt(2.0))

    def test_filter_pole_present(self, model2):
        aug = build_augmented(model2, NoiseSpec.single_node(2, 0, 1.0, 1.0), 0.0)
        assert np.abs(np.linalg.eigvals(aug.a) + 1.0).min() < 1e-9

    def test_regularized_is_hurwitz(self, model2):
        aug = build_augmented(model2, NoiseSpec.single_node(2, 0, 1.0, 1.0), 1e-4)
        assert np.linalg.eigvals(aug.a).real.max() < 0.0

    def test_marginal_mode_at_zero_eps(self, two_node):
        model = SwingModel(net=two_node, m=np.array([2.0, 0.5]), d=np.array([2.0, 0.5]))
        aug = build_augmented(model, NoiseSpec.single_node(2, 0, 1.0, 1.0), 0.0)
        mode = np.concatenate([np.sqrt(model.m) * np.full(2, 1 / np.sqrt(2)), np.zeros(3)])
        assert np.abs(aug.a @ mode).max() < 1e-10

    def test_eigenvalues_match_mode_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(8):
            n = int(rng.integers(2, 7))
            net = random_connected_network(rng, n)
            gamma = 10.0 ** rng.uniform(-0.5, 0.5)
            m = 10.0 ** rng.uniform(-0.3, 0.3, n)
            model = SwingModel(net=net, m=m, d=gamma * m)
            tau = 10.0 ** rng.uniform(-0.5, 0.5)
            eps = float(rng.uniform(0.0, 0.05))
            aug = build_augmented(model, NoiseSpec(p=rng.standard_normal(n), tau=tau), eps)
            lam = np.linalg.eigvalsh(scaled_laplacian(model, eps))
            expected = [-1.0 / tau]
            for lam_j in lam:
                pair = mode_eigenvalues(gamma, max(lam_j, 0.0))
                expected += [pair.mu_plus, pair.mu_minus]
            gap = multiset_gap(np.linalg.eigvals(aug.a), np.asarray(expected, dtype=complex))
            assert gap < 1e-8

    def test_rejects_independent_mode(self, model2):
        noise = NoiseSpec(p=np.array([1.0, 1.0]), tau=1.0, mode="independent")
        with pytest.raises(ValueError, match="coherent"):
            build_augmented(model2, noise, 0.0)


class TestQWeighted:
    def test_phase_projector_uniform_mass(self, two_node):
        model = SwingModel(net=two_node, m=np.array([2.0, 2.0]), d=np.array([1.0, 1.0]))
        qm = q_weighted(model, PerformanceSpec.phase_coherence(2))
        proj = np.eye(2) - np.full((2, 2), 0.5)
        assert qm[:2, :2] == pytest.approx(proj / 2.0, rel=1e-15)
        assert np.abs(qm[2:, 2:]).max() == 0.0

    def test_frequency_block_mass_scaling(self, two_node):
        model = SwingModel(net=two_node, m=np.array([1.0, 4.0]), d=np.array([1.0, 4.0]))
        perf = PerformanceSpec(q11=np.zeros((2, 2)), q22=np.eye(2))
        qm = q_weighted(model, perf)
        assert np.array_equal(qm[2:4, 2:4], np.diag([1.0, 0.25]))
        assert np.abs(qm[:2, :2]).max() == 0.0

    def test_zero_spec_gives_zero(self, model2):
        perf = PerformanceSpec(q11=np.zeros((2, 2)), q22=np.zeros((2, 2)))
        assert np.abs(q_weighted(model2, perf)).max() == 0.0

    def test_output_stays_psd(self):
        rng = np.random.default_rng(17)
        net = random_connected_network(rng, 4)
        m = rng.uniform(0.5, 2.0, 4)
        model = SwingModel(net=net, m=m, d=m)
        a = rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4))
        perf = PerformanceSpec(q11=a @ a.T, q22=b @ b.T)
        qm = q_weighted(model, perf)
        assert np.abs(qm - qm.T).max() < 1e-12
        assert np.linalg.eigvalsh(qm).min() > -1e-10


class TestSpecTypes:
    def test_swing_model_requires_positive_params(self, two_node):
        with pytest.raises(ValueError):
            SwingModel(net=two_node, m=np.array([1.0, 0.0]), d=np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            SwingModel(net=two_node, m=np.array([1.0, 1.0]), d=np.array([1.0, -1.0]))

    def test_noise_spec_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(p=np.array([1.0]), tau=0.0)
        with pytest.raises(ValueError):
            NoiseSpec(p=np.array([1.0]), tau=1.0, mode="both")

    def test_performance_spec_symmetry(self):
        with pytest.raises(ValueError, match="symmetric"):
            PerformanceSpec(q11=np.array([[1.0, 1.0], [0.0, 1.0]]), q22=np.zeros((2, 2)))

    def test_performance_spec_psd(self):
        with pytest.raises(ValueError, match="semidefinite"):
            PerformanceSpec(q11=np.array([[1.0, 0.0], [0.0, -1.0]]), q22=np.zeros((2, 2)))

    def test_finiteness_residual_flags_identity(self):
        assert finiteness_residual(np.eye(3)) == pytest.approx(1 / np.sqrt(3))
        proj = PerformanceSpec.phase_coherence(3).q11
        assert finiteness_residual(proj) < 1e-15


class TestLoadNodeParams:
    def test_full_file(self):
        m, d = load_node_params("0 2.0 1.0\n1 4.0 2.0\n# note\n", 2)
        assert np.array_equal(m, [2.0, 4.0])
        assert np.array_equal(d, [1.0, 2.0])

    def test_partial_file_is_error(self):
        with pytest.raises(NetworkFormatError, match="missing parameters"):
            load_node_params("0 1.0 1.0\n", 2)

    def test_duplicate_node_is_error(self):
        with pytest.raises(NetworkFormatError, match="duplicate"):
            load_node_params("0 1.0 1.0\n0 2.0 2.0\n", 1)

    def test_out_of_range_node(self):
        with pytest.raises(NetworkFormatError, match="out of range"):
            load_node_params("5 1.0 1.0\n", 2)

    def test_non_positive_params(self):
        with pytest.raises(NetworkFormatError, match="positive"):
            load_node_params("0 0.0 1.0\n1 1.0 1.0\n", 2)

    def test_malformed_line(self):
        with pytest.raises(NetworkFormatError, match="line 1"):
            load_node_params("0 1.0\n", 1)
