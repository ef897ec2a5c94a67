"""Swing-system model, noise and measure specifications, augmented system.

The augmented state is ``(phi_bar, omega_bar, eta)`` of dimension 2N+1:
mass-scaled phase and frequency deviations plus the scalar first-order
filter state that turns white noise into exponentially correlated noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NetworkFormatError, NonUniformRatio, NotHurwitz
from .netgraph import Network, laplacian

__all__ = [
    "SwingModel",
    "NoiseSpec",
    "PerformanceSpec",
    "AugmentedSystem",
    "scaled_laplacian",
    "uniform_ratio",
    "build_augmented",
    "q_weighted",
    "load_node_params",
    "finiteness_residual",
]

#: relative spread of d_i/m_i allowed before the ratio counts as non-uniform
RATIO_RTOL = 1e-12

#: max real part of a regularized system eigenvalue before it counts as
#: non-decaying (shared by the Hurwitz gates here and in the Gramian solver)
HURWITZ_TOL = -1e-12

#: tolerance of the finiteness gate on |q11 u1|, relative to max(1, |q11|)
FINITENESS_RTOL = 1e-10


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True)
class SwingModel:
    """A network plus per-node inertia (s^2) and damping (s), all positive."""

    net: Network
    m: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        d = np.asarray(self.d, dtype=float)
        if m.shape != (self.net.n,) or d.shape != (self.net.n,):
            raise ValueError(f"m and d must have shape ({self.net.n},)")
        if np.any(m <= 0.0) or np.any(d <= 0.0):
            raise ValueError("inertia and damping must be strictly positive")
        _freeze(m, d)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "d", d)

    @classmethod
    def uniform(cls, net: Network, m: float = 1.0, d: float = 1.0) -> "SwingModel":
        return cls(net=net, m=np.full(net.n, float(m)), d=np.full(net.n, float(d)))


@dataclass(frozen=True)
class NoiseSpec:
    """Injection amplitudes, correlation time and correlation mode.

    ``coherent`` drives every noisy node with one shared filtered channel
    (amplitudes p_i), which is the single-eta augmented construction;
    ``independent`` gives each noisy node its own channel and is realized
    downstream by superposing one coherent evaluation per node.
    """

    p: np.ndarray
    tau: float
    mode: str = "coherent"

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if p.ndim != 1:
            raise ValueError("amplitude vector must be one-dimensional")
        if not self.tau > 0.0:
            raise ValueError(f"correlation time must be positive, got {self.tau}")
        if self.mode not in ("coherent", "independent"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        _freeze(p)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "tau", float(self.tau))

    @classmethod
    def single_node(cls, n: int, alpha: int, amplitude: float, tau: float) -> "NoiseSpec":
        if not 0 <= alpha < n:
            raise ValueError(f"node {alpha} out of range for n={n}")
        p = np.zeros(n)
        p[alpha] = amplitude
        return cls(p=p, tau=tau)


@dataclass(frozen=True)
class PerformanceSpec:
    """Pair of symmetric PSD weight matrices for phases and frequencies."""

    q11: np.ndarray
    q22: np.ndarray

    def __post_init__(self):
        q11 = np.asarray(self.q11, dtype=float)
        q22 = np.asarray(self.q22, dtype=float)
        n = q11.shape[0]
        if q11.shape != (n, n) or q22.shape != (n, n):
            raise ValueError("q11 and q22 must be square matrices of equal size")
        for name, q in (("q11", q11), ("q22", q22)):
            scale = max(1.0, np.abs(q).max())
            if not np.allclose(q, q.T, rtol=0.0, atol=1e-10 * scale):
                raise ValueError(f"{name} is not symmetric")
            if np.linalg.eigvalsh(q).min() < -1e-10 * scale:
                raise ValueError(f"{name} is not positive semidefinite")
        _freeze(q11, q22)
        object.__setattr__(self, "q11", q11)
        object.__setattr__(self, "q22", q22)

    @property
    def n(self) -> int:
        return self.q11.shape[0]

    @classmethod
    def phase_coherence(cls, n: int) -> "PerformanceSpec":
        """Variance of phases around the network mean: q11 = I - u1 u1^T."""
        return cls(q11=np.eye(n) - np.full((n, n), 1.0 / n), q22=np.zeros((n, n)))

    @classmethod
    def freq_coherence(cls, n: int) -> "PerformanceSpec":
        """Variance of frequencies around the network mean."""
        return cls(q11=np.zeros((n, n)), q22=np.eye(n) - np.full((n, n), 1.0 / n))


def finiteness_residual(q11: np.ndarray) -> float:
    """How strongly q11 observes the uniform phase-shift mode.

    Returns ``max|q11 @ u1|``; the time-integrated measure is finite only
    if this vanishes. Callers compare against a tolerance relative to
    ``max(1, |q11|_max)``.
    """
    q11 = np.asarray(q11, dtype=float)
    n = q11.shape[0]
    u1 = np.full(n, 1.0 / np.sqrt(n))
    return float(np.abs(q11 @ u1).max())


@dataclass(frozen=True)
class AugmentedSystem:
    """State matrix, input vector and filter gain of the 2N+1 system."""

    a: np.ndarray
    b: np.ndarray
    eps: float
    eta0: float

    def __post_init__(self):
        _freeze(np.asarray(self.a), np.asarray(self.b))

    @property
    def n(self) -> int:
        return (self.a.shape[0] - 1) // 2


def scaled_laplacian(model: SwingModel, eps: float = 0.0) -> np.ndarray:
    """Mass-scaled, optionally regularized Laplacian M^{-1/2}(L+eps I)M^{-1/2}."""
    if eps < 0.0:
        raise ValueError(f"regularization must be non-negative, got {eps}")
    lap = laplacian(model.net)
    if eps:
        lap = lap + eps * np.eye(model.net.n)
    rm = 1.0 / np.sqrt(model.m)
    return rm[:, None] * lap * rm[None, :]


def uniform_ratio(model: SwingModel) -> float:
    """Common damping-to-inertia ratio, or :class:`NonUniformRatio`.

    The closed-form evaluator is exact only for a uniform ratio, so the
    tolerance is strict (1e-12 relative).
    """
    r = model.d / model.m
    gamma = float(r.mean())
    spread = float(np.abs(r - gamma).max() / gamma)
    if spread >= RATIO_RTOL:
        raise NonUniformRatio(spread)
    return gamma


def build_augmented(model: SwingModel, noise: NoiseSpec, eps: float = 0.0) -> AugmentedSystem:
    """Assemble the colored-noise augmented system for one coherent channel.

    Block structure::

        [ 0            I          0            ]
        [ -L_M(eps)    -M^{-1}D   M^{-1/2} p   ]
        [ 0            0          -1/tau       ]

    driven through ``b = (0, ..., 0, eta0)`` with ``eta0 = sqrt(2/tau)``.
    For ``eps > 0`` the matrix must be Hurwitz; a non-decaying eigenvalue
    signals numerical pathology and raises :class:`NotHurwitz`.
    """
    if noise.mode != "coherent":
        raise ValueError("augmented system represents a single coherent channel; "
                         "superpose per-node systems for independent noise")
    n = model.net.n
    if noise.p.shape != (n,):
        raise ValueError(f"amplitude vector must have shape ({n},)")
    a = np.zeros((2 * n + 1, 2 * n + 1))
    a[:n, n:2 * n] = np.eye(n)
    a[n:2 * n, :n] = -scaled_laplacian(model, eps)
    a[n:2 * n, n:2 * n] = -np.diag(model.d / model.m)
    a[n:2 * n, 2 * n] = noise.p / np.sqrt(model.m)
    a[2 * n, 2 * n] = -1.0 / noise.tau
    eta0 = np.sqrt(2.0 / noise.tau)
    b = np.zeros(2 * n + 1)
    b[2 * n] = eta0
    if eps > 0.0 and np.linalg.eigvals(a).real.max() > HURWITZ_TOL:
        raise NotHurwitz(f"regularized system (eps={eps}) has a non-decaying mode")
    return AugmentedSystem(a=a, b=b, eps=float(eps), eta0=float(eta0))


def q_weighted(model: SwingModel, perf: PerformanceSpec) -> np.ndarray:
    """Mass-scaled block-diagonal weight of the augmented output."""
    n = model.net.n
    if perf.n != n:
        raise ValueError(f"performance spec is {perf.n}x{perf.n}, network has {n} nodes")
    rm = 1.0 / np.sqrt(model.m)
    qm = np.zeros((2 * n + 1, 2 * n + 1))
    qm[:n, :n] = rm[:, None] * perf.q11 * rm[None, :]
    qm[n:2 * n, n:2 * n] = rm[:, None] * perf.q22 * rm[None, :]
    return qm


def load_node_params(text: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Parse per-node inertia/damping lines ``i m_i d_i``.

    Every node 0..n-1 must appear exactly once; partial files are an
    error. (Absent files are handled by the caller, which defaults to
    m = d = 1.)
    """
    m = np.full(n, np.nan)
    d = np.full(n, np.nan)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 3:
            raise NetworkFormatError(f"expected 'i m d', got {raw!r}", line=lineno)
        try:
            i = int(parts[0])
            mi, di = float(parts[1]), float(parts[2])
        except ValueError:
            raise NetworkFormatError(f"malformed node-parameter line {raw!r}", line=lineno) from None
        if not 0 <= i < n:
            raise NetworkFormatError(f"node {i} out of range for n={n}", line=lineno)
        if not np.isnan(m[i]):
            raise NetworkFormatError(f"duplicate parameters for node {i}", line=lineno)
        if mi <= 0.0 or di <= 0.0:
            raise NetworkFormatError(f"inertia and damping must be positive, got {raw!r}", line=lineno)
        m[i], d[i] = mi, di
    missing = np.flatnonzero(np.isnan(m))
    if missing.size:
        raise NetworkFormatError(f"missing parameters for nodes {missing.tolist()} (partial files are an error)")
    return m, d
