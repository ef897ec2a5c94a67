"""Monte-Carlo verification of the closed-form and Gramian results.

Simulates the swing dynamics driven by exponentially correlated noise and
estimates the long-time output variance, plus a direct estimator of the
noise autocorrelation. The filter update is the exact discrete transition
(no discretization bias in the noise channel); the swing update is
semi-implicit with O(dt) bias controlled by the dt-halving test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .errors import FinitenessViolated, InputError, UnstableIntegration
from .kernels import get_backend
from .netgraph import laplacian
from .sysmodel import (
    FINITENESS_RTOL,
    NoiseSpec,
    PerformanceSpec,
    SwingModel,
    finiteness_residual,
    scaled_laplacian,
)

__all__ = [
    "SimConfig",
    "slowest_relaxation",
    "VarianceEstimate",
    "ou_step",
    "simulate_variance",
    "estimate_correlator",
]

#: simulation aborts when any state magnitude exceeds this
OVERFLOW_GUARD = 1e8

_CHUNK_STEPS = 8192


@dataclass(frozen=True)
class SimConfig:
    """Time step, horizons, trajectory count and RNG seed.

    The step must resolve both the filter (``dt < tau/10``) and the
    fastest swing mode; the burn-in must cover ten times the slowest
    relaxation. Violations are rejected at simulation time, when the
    model is known.
    """

    dt: float
    t_burn: float
    t_measure: float
    n_traj: int
    seed: int

    def __post_init__(self):
        if not self.dt > 0.0:
            raise InputError(f"dt must be positive, got {self.dt}")
        if self.t_burn < 0.0 or not self.t_measure > 0.0:
            raise InputError("t_burn must be non-negative and t_measure positive")
        if self.n_traj < 2:
            raise InputError("need at least two trajectories for a standard error")


@dataclass(frozen=True)
class VarianceEstimate:
    """Across-trajectory mean of time-averaged squared output."""

    mean: float
    stderr: float
    n_effective: int


def ou_step(eta, tau: float, dt: float, xi):
    """Exact one-step transition of the unit-variance colored-noise filter.

    ``eta' = eta e^{-dt/tau} + sqrt(1 - e^{-2 dt/tau}) xi`` with ``xi`` a
    standard normal draw; works elementwise on arrays.
    """
    if not (tau > 0.0 and dt > 0.0):
        raise ValueError("tau and dt must be positive")
    decay = math.exp(-dt / tau)
    return eta * decay + math.sqrt(1.0 - decay * decay) * xi


def slowest_relaxation(model: SwingModel) -> float:
    """1 / min |Re mu| over the decaying swing modes."""
    n = model.net.n
    block = np.zeros((2 * n, 2 * n))
    block[:n, n:] = np.eye(n)
    block[n:, :n] = -scaled_laplacian(model, 0.0)
    block[n:, n:] = -np.diag(model.d / model.m)
    rates = np.abs(np.linalg.eigvals(block).real)
    rates = rates[rates > 1e-9]
    return float(1.0 / rates.min()) if rates.size else float(model.m.max() / model.d.min())


def _validate_config(cfg: SimConfig, model: SwingModel, tau: float) -> None:
    lam_max = float(np.linalg.eigvalsh(scaled_laplacian(model, 0.0)).max())
    gamma_max = float((model.d / model.m).max())
    dt_cap = 0.1 * min(2.0 * math.pi / math.sqrt(lam_max) if lam_max > 0 else math.inf,
                       1.0 / gamma_max)
    if cfg.dt >= tau / 10.0 or cfg.dt >= dt_cap:
        raise InputError(
            f"dt={cfg.dt} too coarse: need dt < min(tau/10 = {tau / 10.0:.3g}, {dt_cap:.3g})"
        )
    t_relax = max(tau, 1.0 / (model.d / model.m).min(), slowest_relaxation(model))
    if cfg.t_burn < 10.0 * t_relax:
        raise InputError(f"t_burn={cfg.t_burn} shorter than 10x slowest relaxation ({10.0 * t_relax:.3g})")


def _channel_matrix(model: SwingModel, noise: NoiseSpec) -> np.ndarray:
    """(N, channels) amplitude matrix: one shared channel when coherent,
    one per noisy node when independent."""
    n = model.net.n
    if noise.p.shape != (n,):
        raise InputError(f"amplitude vector must have shape ({n},)")
    if noise.mode == "coherent":
        return noise.p.reshape(n, 1).copy()
    nodes = np.flatnonzero(noise.p)
    p_mat = np.zeros((n, max(nodes.size, 1)))
    for c, alpha in enumerate(nodes):
        p_mat[alpha, c] = noise.p[alpha]
    return p_mat


def _require_within_guard(phi: np.ndarray, omega: np.ndarray) -> None:
    worst = max(float(np.abs(phi).max()), float(np.abs(omega).max()))
    if not worst <= OVERFLOW_GUARD:
        raise UnstableIntegration(f"state magnitude {worst:.3e} exceeded guard {OVERFLOW_GUARD:.0e}")


def simulate_variance(model: SwingModel, noise: NoiseSpec, perf: PerformanceSpec,
                      cfg: SimConfig, phi0: np.ndarray | None = None,
                      backend: str | None = None) -> VarianceEstimate:
    """Estimate the long-time output variance by ergodic averaging.

    Time-averages the quadratic output over ``t_measure`` after a
    ``t_burn`` transient, across ``n_traj`` trajectories with independent
    counter-based noise streams split from the seed. The mean phase is
    recentered every step so the marginal uniform mode cannot diffuse;
    this leaves the output unchanged because the phase weight annihilates
    that direction (checked up front).
    """
    res = finiteness_residual(perf.q11)
    if res > FINITENESS_RTOL * max(1.0, float(np.abs(perf.q11).max())):
        raise FinitenessViolated(
            f"phase weight observes the uniform mode (|q11 u1|_max = {res:.3e})"
        )
    _validate_config(cfg, model, noise.tau)
    n = model.net.n
    if perf.n != n:
        raise InputError(f"performance spec is {perf.n}x{perf.n}, network has {n} nodes")

    kern = get_backend(backend)
    lap = laplacian(model.net)
    inv_m = 1.0 / model.m
    dfac = 1.0 / (1.0 + cfg.dt * model.d / model.m)
    p_mat = _channel_matrix(model, noise)
    n_chan = p_mat.shape[1]
    decay = math.exp(-cfg.dt / noise.tau)
    ou_b = math.sqrt(1.0 - decay * decay)
    q11 = np.ascontiguousarray(perf.q11)
    q22 = np.ascontiguousarray(perf.q22)
    has_q11 = bool(np.any(q11))
    has_q22 = bool(np.any(q22))

    n_traj = cfg.n_traj
    phi = np.zeros((n_traj, n))
    if phi0 is not None:
        phi[:] = np.asarray(phi0, dtype=float)
    omega = np.zeros((n_traj, n))
    eta = np.zeros((n_traj, n_chan))
    acc = np.zeros(n_traj)
    _require_within_guard(phi, omega)

    gens = [np.random.Generator(np.random.Philox(s))
            for s in np.random.SeedSequence(cfg.seed).spawn(n_traj)]

    steps_burn = math.ceil(cfg.t_burn / cfg.dt)
    steps_measure = math.ceil(cfg.t_measure / cfg.dt)

    def run(total_steps: int, measure: bool) -> None:
        done = 0
        while done < total_steps:
            s = min(_CHUNK_STEPS, total_steps - done)
            xi = np.empty((s, n_traj, n_chan))
            for t, g in enumerate(gens):
                xi[:, t, :] = g.standard_normal((s, n_chan))
            executed = kern.swing_chunk(phi, omega, eta, xi, lap, inv_m, dfac, p_mat,
                                        q11, q22, cfg.dt, decay, ou_b, has_q11, has_q22,
                                        measure, acc, OVERFLOW_GUARD)
            if executed < s:
                _require_within_guard(phi, omega)
            done += s

    run(steps_burn, measure=False)
    run(steps_measure, measure=True)

    traj_means = acc / steps_measure
    mean = float(traj_means.mean())
    stderr = float(traj_means.std(ddof=1) / math.sqrt(n_traj))
    return VarianceEstimate(mean=mean, stderr=stderr, n_effective=n_traj)


def estimate_correlator(tau: float, lags, cfg: SimConfig) -> list[tuple[float, float, float]]:
    """Empirical autocorrelation of the simulated colored-noise channel.

    Returns ``(lag, correlation, stderr)`` per requested lag; the
    stationary target is ``exp(-lag/tau)`` with unit variance at lag 0.
    """
    if not tau > 0.0:
        raise InputError(f"tau must be positive, got {tau}")
    if cfg.dt >= tau / 10.0:
        raise InputError(f"dt={cfg.dt} too coarse for tau={tau}")
    if cfg.t_burn < 10.0 * tau:
        raise InputError(f"t_burn={cfg.t_burn} shorter than 10 tau")
    lags = [float(s) for s in lags]
    if any(s < 0 for s in lags):
        raise InputError("lags must be non-negative")

    decay = math.exp(-cfg.dt / tau)
    ou_b = math.sqrt(1.0 - decay * decay)
    steps_burn = math.ceil(cfg.t_burn / cfg.dt)
    steps_measure = math.ceil(cfg.t_measure / cfg.dt)
    max_shift = max(int(round(s / cfg.dt)) for s in lags)
    if max_shift >= steps_measure // 2:
        raise InputError("t_measure too short for the requested lags")

    gens = [np.random.Generator(np.random.Philox(s))
            for s in np.random.SeedSequence(cfg.seed).spawn(cfg.n_traj)]
    series = np.empty((cfg.n_traj, steps_measure))
    for t, g in enumerate(gens):
        xi = g.standard_normal(steps_burn + steps_measure)
        # eta_k = decay * eta_{k-1} + ou_b * xi_k as a linear recursion
        path, _ = scipy.signal.lfilter([ou_b], [1.0, -decay], xi, zi=[0.0])
        series[t] = path[steps_burn:]

    out = []
    for s in lags:
        k = int(round(s / cfg.dt))
        prod = series[:, : steps_measure - k] * series[:, k:] if k else series * series
        per_traj = prod.mean(axis=1)
        corr = float(per_traj.mean())
        stderr = float(per_traj.std(ddof=1) / math.sqrt(cfg.n_traj))
        out.append((s, corr, stderr))
    return out
