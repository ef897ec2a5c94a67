"""Randomized cross-method validation suite.

Every check compares two independent routes to the same quantity
(closed form vs Gramian oracle, analytic transform vs numeric
eigensolver, simulation vs formula) on seeded random instances, so a
single run exercises the package end to end. The report is plain text,
deterministic for a given seed and size list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gramian, mcsim, netgraph, spectral, sysmodel
from .errors import CriticalDamping, FilterResonance

__all__ = ["CheckResult", "ValidationReport", "run_validation", "random_connected_network"]

DEFAULT_SIZES = (3, 4, 5, 6, 7, 8)

#: eps schedule used for oracle comparisons: tight enough that the linear
#: extrapolation error is far below the 1e-5 agreement target even for
#: slow modes and long correlation times
ORACLE_EPS = (1e-5, 1e-6, 1e-7)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    seed: int
    sizes: tuple[int, ...]
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [
            "gridnoise validation report",
            f"seed={self.seed}",
            "sizes=" + ",".join(str(s) for s in self.sizes),
        ]
        width = max(len(c.name) for c in self.checks)
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(
                f"check {c.name:<{width}} {status} worst={c.worst:.3e} tol={c.tol:.3e} {c.detail}"
            )
        failures = sum(not c.passed for c in self.checks)
        lines.append(f"result {'PASS' if failures == 0 else 'FAIL'} "
                     f"checks={len(self.checks)} failures={failures}")
        return "\n".join(lines) + "\n"


def random_connected_network(rng: np.random.Generator, n: int,
                             lo: float = 0.5, hi: float = 2.0) -> netgraph.Network:
    """Random connected graph: a random spanning tree plus a few extra edges."""
    edges: dict[tuple[int, int], float] = {}
    order = rng.permutation(n)
    for k in range(1, n):
        i, j = int(order[k]), int(order[int(rng.integers(0, k))])
        edges[(min(i, j), max(i, j))] = float(rng.uniform(lo, hi))
    for _ in range(int(rng.integers(0, n))):
        i, j = (int(v) for v in rng.integers(0, n, 2))
        if i != j:
            edges.setdefault((min(i, j), max(i, j)), float(rng.uniform(lo, hi)))
    return netgraph.Network(n=n, edges=tuple((i, j, b) for (i, j), b in edges.items()))


def _random_psd(rng: np.random.Generator, n: int, project_uniform: bool) -> np.ndarray:
    a = rng.standard_normal((n, n))
    q = a @ a.T / n
    if project_uniform:
        pr = np.eye(n) - np.full((n, n), 1.0 / n)
        q = pr @ q @ pr
        q = 0.5 * (q + q.T)
    return q


def _random_system(rng: np.random.Generator, n: int):
    net = random_connected_network(rng, n)
    gamma = 10.0 ** rng.uniform(-1, 1)
    m = 10.0 ** rng.uniform(-0.5, 0.5, n)
    return sysmodel.SwingModel(net=net, m=m, d=gamma * m), gamma


def _check_kernel_diagonal(rng: np.random.Generator, n_tuples: int = 10_000) -> CheckResult:
    """f on the diagonal vs its simplified closed form."""
    tol = 1e-12
    tau = 10.0 ** rng.uniform(-2, 2, n_tuples)
    gam = 10.0 ** rng.uniform(-2, 2, n_tuples)
    lam = 10.0 ** rng.uniform(-2, 2, n_tuples)
    worst = 0.0
    for t, g, lm in zip(tau, gam, lam):
        full = spectral.f_kernel(t, g, lm, lm)
        simple = t * (1.0 + g * t) / (2.0 * lm * g * (1.0 / t + g + lm * t))
        worst = max(worst, abs(full - simple) / abs(simple))
    return CheckResult("kernel-diagonal-identity", worst < tol, worst, tol, f"n={n_tuples}")


def _check_kernel_symmetry(rng: np.random.Generator, n_tuples: int = 200) -> CheckResult:
    tol = 1e-12
    worst = 0.0
    for _ in range(n_tuples):
        t, g = 10.0 ** rng.uniform(-1.5, 1.5, 2)
        ll, lq = 10.0 ** rng.uniform(-2, 2, 2)
        for kern in (spectral.f_kernel, spectral.g_kernel):
            a, b = kern(t, g, ll, lq), kern(t, g, lq, ll)
            worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    return CheckResult("kernel-symmetry", worst < tol, worst, tol, f"n={n_tuples}")


def _check_mode_vieta(rng: np.random.Generator, n_tuples: int = 200) -> CheckResult:
    tol = 1e-12
    worst = 0.0
    for _ in range(n_tuples):
        g = 10.0 ** rng.uniform(-1, 1)
        lm = 10.0 ** rng.uniform(-2, 2)
        pair = spectral.mode_eigenvalues(g, lm)
        worst = max(worst,
                    abs(pair.mu_plus + pair.mu_minus + g) / g,
                    abs(pair.mu_plus * pair.mu_minus - lm) / lm)
    return CheckResult("mode-vieta", worst < tol, worst, tol, f"n={n_tuples}")


def _check_spectral_vs_oracle(rng: np.random.Generator, sizes, per_size: int,
                              f_perturbation: float) -> CheckResult:
    tol = 1e-5
    worst = 0.0
    count = 0
    for n in sizes:
        for _ in range(per_size):
            model, _ = _random_system(rng, n)
            noise = sysmodel.NoiseSpec(p=rng.standard_normal(n), tau=10.0 ** rng.uniform(-2, 2))
            perf = sysmodel.PerformanceSpec(q11=_random_psd(rng, n, True),
                                            q22=_random_psd(rng, n, False))
            ps = spectral.performance_generic(model, noise, perf, _f_scale=f_perturbation).value
            po = gramian.performance_oracle(model, noise, perf, eps_schedule=ORACLE_EPS).value
            worst = max(worst, abs(ps - po) / abs(po))
            count += 1
    return CheckResult("spectral-vs-oracle", worst < tol, worst, tol, f"n={count}")


def _check_lyapunov_vs_eigensum(rng: np.random.Generator, n_systems: int = 12) -> CheckResult:
    tol = 1e-7
    worst = 0.0
    done = 0
    while done < n_systems:
        n = int(rng.integers(2, 6))
        model, _ = _random_system(rng, n)
        noise = sysmodel.NoiseSpec(p=rng.standard_normal(n), tau=10.0 ** rng.uniform(-0.7, 0.7))
        perf = sysmodel.PerformanceSpec(q11=_random_psd(rng, n, True),
                                        q22=_random_psd(rng, n, False))
        qm = sysmodel.q_weighted(model, perf)
        aug = sysmodel.build_augmented(model, noise, 0.01)
        direct = gramian.solve_lyapunov(aug, qm)
        try:
            eigsum = gramian.gramian_spectral(aug, qm)
        except (CriticalDamping, FilterResonance):
            continue
        scale = max(float(np.abs(direct.x).max()), 1e-300)
        worst = max(worst, float(np.abs(direct.x - eigsum.x).max()) / scale)
        done += 1
    return CheckResult("lyapunov-vs-eigensum", worst < tol, worst, tol, f"n={n_systems}")


def _trl_system(rng: np.random.Generator):
    """Random uniform-ratio system away from critical damping and resonance."""
    while True:
        n = int(rng.integers(2, 7))
        model, gamma = _random_system(rng, n)
        tau = 10.0 ** rng.uniform(-0.7, 0.7)
        lam = np.linalg.eigvalsh(sysmodel.scaled_laplacian(model, 0.01))
        big = np.abs(np.sqrt(gamma * gamma - 4.0 * lam + 0j))
        filt = np.abs(1.0 - gamma * tau + tau * tau * lam)
        if big.min() > 0.05 and filt.min() > 0.05:
            noise = sysmodel.NoiseSpec(p=rng.standard_normal(n), tau=tau)
            return model, noise


def _check_transform(rng: np.random.Generator, n_systems: int = 20) -> CheckResult:
    """Analytic left/right transformation: bi-orthogonality, diagonalization,
    eigenvalue multiset against the numeric eigensolver."""
    from scipy.optimize import linear_sum_assignment

    tol = 1e-8
    worst = 0.0
    for _ in range(n_systems):
        model, noise = _trl_system(rng)
        pair = gramian.build_trl(model, noise, 0.01)
        aug = sysmodel.build_augmented(model, noise, 0.01)
        dim = aug.a.shape[0]
        eye = np.eye(dim)
        worst = max(worst,
                    float(np.abs(pair.t_l @ pair.t_r - eye).max()),
                    float(np.abs(pair.t_r @ pair.t_l - eye).max()))
        diag = pair.t_l @ aug.a @ pair.t_r
        worst = max(worst, float(np.abs(diag - np.diag(pair.mu)).max()))
        mu_num = np.linalg.eigvals(aug.a)
        cost = np.abs(mu_num[:, None] - pair.mu[None, :])
        r, c = linear_sum_assignment(cost)
        worst = max(worst, float(cost[r, c].max()))
    return CheckResult("analytic-transform", worst < tol, worst, tol, f"n={n_systems}")


def _asymptote_graphs():
    path4 = netgraph.Network(n=4, edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)))
    star5 = netgraph.Network(n=5, edges=tuple((0, k, 1.0) for k in range(1, 5)))
    return path4, star5


def _check_asymptote_small(_: np.random.Generator) -> CheckResult:
    tol = 1e-2
    tau = 1e-3
    worst = 0.0
    for net in _asymptote_graphs():
        model = sysmodel.SwingModel.uniform(net)
        for alpha in range(net.n):
            p_val = spectral.phase_coherence(model, alpha, 1.0, tau).value
            asym = spectral.small_tau_asymptote(model, alpha, 1.0, tau)
            worst = max(worst, abs(p_val - asym) / asym)
    return CheckResult("asymptote-small-tau", worst < tol, worst, tol, "P4,S5 all nodes")


def _check_asymptote_large(_: np.random.Generator) -> CheckResult:
    tol = 1e-2
    tau = 1e3
    worst = 0.0
    for net in _asymptote_graphs():
        model = sysmodel.SwingModel.uniform(net)
        for alpha in range(net.n):
            p_val = spectral.phase_coherence(model, alpha, 1.0, tau).value
            asym = spectral.large_tau_asymptote(model, alpha, 1.0)
            worst = max(worst, abs(p_val - asym) / asym)
    return CheckResult("asymptote-large-tau", worst < tol, worst, tol, "P4,S5 all nodes")


def _check_ou_correlator(seed: int) -> CheckResult:
    tau = 1.0
    cfg = mcsim.SimConfig(dt=0.05, t_burn=15.0, t_measure=4000.0, n_traj=16, seed=seed)
    rows = mcsim.estimate_correlator(tau, [tau / 2, tau, 2 * tau], cfg)
    worst = 0.0
    stderr_ok = True
    for s, corr, stderr in rows:
        worst = max(worst, abs(corr - math.exp(-s / tau)) / (3.0 * stderr))
        stderr_ok = stderr_ok and stderr < 0.01
    return CheckResult("ou-correlator", worst < 1.0 and stderr_ok, worst, 1.0,
                       "z/3 at lags tau/2,tau,2tau; stderr<1%")


def _check_mc_variance(seed: int) -> CheckResult:
    net = netgraph.Network(n=2, edges=((0, 1, 1.0),))
    model = sysmodel.SwingModel.uniform(net)
    noise = sysmodel.NoiseSpec.single_node(2, 0, 1.0, 1.0)
    perf = sysmodel.PerformanceSpec.phase_coherence(2)
    cfg = mcsim.SimConfig(dt=0.02, t_burn=60.0, t_measure=1500.0, n_traj=8, seed=seed)
    est = mcsim.simulate_variance(model, noise, perf, cfg)
    target = spectral.phase_coherence(model, 0, 1.0, 1.0).value
    rel = abs(est.mean - target) / target
    tol = max(0.05, 3.0 * est.stderr / est.mean)
    return CheckResult("mc-variance", rel < tol, rel, tol, f"stderr={est.stderr:.3e}")


def run_validation(seed: int = 42, sizes=DEFAULT_SIZES, per_size: int = 3,
                   f_perturbation: float = 1.0) -> ValidationReport:
    """Run the full cross-method suite with one seeded RNG stream.

    ``f_perturbation`` scales the phase kernel in the closed-form path; any
    value other than 1.0 must make the oracle-equivalence check fail, which
    demonstrates the harness actually has teeth.
    """
    sizes = tuple(int(s) for s in sizes)
    rng = np.random.default_rng(seed)
    checks = (
        _check_kernel_diagonal(rng),
        _check_kernel_symmetry(rng),
        _check_mode_vieta(rng),
        _check_spectral_vs_oracle(rng, sizes, per_size, f_perturbation),
        _check_lyapunov_vs_eigensum(rng),
        _check_transform(rng),
        _check_asymptote_small(rng),
        _check_asymptote_large(rng),
        _check_ou_correlator(seed),
        _check_mc_variance(seed),
    )
    return ValidationReport(seed=seed, sizes=sizes, checks=checks)
