"""Closed-form performance measures from the Laplacian eigen-decomposition.

The generic quadratic measure is a double sum over non-zero Laplacian
modes weighted by two scalar kernels ``f`` (phase block) and ``g``
(frequency block) of ``(tau, gamma, lambda_l, lambda_q)``. This module
evaluates that sum directly at zero regularization, plus the single-node
phase-coherence specialization and its small/large correlation-time
asymptotics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDenominator, FinitenessViolated, NonUniformRatio
from .netgraph import _fix_signs, laplacian, laplacian_pinv_diag, spectrum
from .sysmodel import (
    FINITENESS_RTOL,
    NoiseSpec,
    PerformanceSpec,
    SwingModel,
    finiteness_residual,
    scaled_laplacian,
    uniform_ratio,
)

__all__ = [
    "ModePair",
    "MeasureResult",
    "mode_eigenvalues",
    "f_kernel",
    "g_kernel",
    "performance_generic",
    "phase_coherence",
    "small_tau_asymptote",
    "large_tau_asymptote",
]

#: kernel denominator below this is the double-zero-mode degeneracy
DEGENERATE_TOL = 1e-14

#: sandwiched measure coefficients below this magnitude are dropped from
#: the double sum (this removes the divergent zero-mode phase term exactly
#: when the finiteness condition holds)
COEF_TOL = 1e-13


@dataclass(frozen=True)
class ModePair:
    """The two swing eigenvalues sharing one scaled-Laplacian mode.

    ``gamma_big`` is ``sqrt(gamma^2 - 4 lambda)`` (complex for underdamped
    modes); the pair is ``(-gamma +/- gamma_big)/2``. ``degenerate`` flags
    critical damping, where the pair coalesces.
    """

    mu_plus: complex
    mu_minus: complex
    gamma_big: complex
    degenerate: bool


@dataclass(frozen=True)
class MeasureResult:
    """A performance value plus how it was obtained."""

    value: float
    method: str
    diagnostics: dict = field(default_factory=dict)


def mode_eigenvalues(gamma: float, lambda_m: float) -> ModePair:
    """Swing-mode eigenvalue pair for one scaled-Laplacian eigenvalue."""
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if lambda_m < 0.0:
        raise ValueError(f"lambda must be non-negative, got {lambda_m}")
    big = np.sqrt(complex(gamma * gamma - 4.0 * lambda_m))
    mu_plus = 0.5 * (-gamma + big)
    mu_minus = 0.5 * (-gamma - big)
    return ModePair(
        mu_plus=complex(mu_plus),
        mu_minus=complex(mu_minus),
        gamma_big=complex(big),
        degenerate=bool(abs(big) < 1e-9 * gamma),
    )


def _kernel_parts(tau, gamma, lam_l, lam_q):
    """Shared prefactor, denominator and bracket numerators of f and g.

    Works elementwise on arrays; no degeneracy guarding here.
    """
    pre = 0.5 * tau * tau / ((1.0 + gamma * tau + lam_l * tau * tau)
                             * (1.0 + gamma * tau + lam_q * tau * tau))
    s = lam_l + lam_q
    dsq = (lam_l - lam_q) ** 2
    den = 2.0 * gamma * gamma * s + dsq
    f_num = 8.0 * gamma * gamma * tau + 4.0 * gamma + 2.0 * gamma * tau * tau * (2.0 * gamma * gamma + s)
    g_num = 2.0 * gamma * gamma * tau * s - tau * dsq + 2.0 * gamma * (s + 2.0 * tau * tau * lam_l * lam_q)
    return pre, den, f_num, g_num


def _check_kernel_args(tau, gamma, lam_l, lam_q):
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if lam_l < 0.0 or lam_q < 0.0:
        raise ValueError(f"eigenvalues must be non-negative, got {lam_l}, {lam_q}")


def f_kernel(tau: float, gamma: float, lam_l: float, lam_q: float) -> float:
    """Phase-block kernel of the generic closed form.

    Symmetric in the two eigenvalues and strictly positive; diverges when
    both eigenvalues sit at the zero mode, which the finiteness condition
    excludes from observable measures.
    """
    _check_kernel_args(tau, gamma, lam_l, lam_q)
    pre, den, f_num, _ = _kernel_parts(tau, gamma, lam_l, lam_q)
    if abs(den) < DEGENERATE_TOL:
        raise DegenerateDenominator(f"f kernel denominator {den:.3e} at lambda=({lam_l}, {lam_q})")
    return float(pre * (f_num / den + tau ** 3))


def g_kernel(tau: float, gamma: float, lam_l: float, lam_q: float) -> float:
    """Frequency-block kernel of the generic closed form."""
    _check_kernel_args(tau, gamma, lam_l, lam_q)
    pre, den, _, g_num = _kernel_parts(tau, gamma, lam_l, lam_q)
    if abs(den) < DEGENERATE_TOL:
        raise DegenerateDenominator(f"g kernel denominator {den:.3e} at lambda=({lam_l}, {lam_q})")
    return float(pre * (g_num / den))


def _g_zero_mode_limit(tau: float, gamma: float) -> float:
    """Limit of g as both eigenvalues go to the zero mode.

    The 0/0 in the raw expression has the path-independent limit
    ``tau^2 / (2 gamma (1 + gamma tau))``; the frequency response of the
    uniform mode is damped, so its contribution stays finite.
    """
    return tau * tau / (2.0 * gamma * (1.0 + gamma * tau))


def _kahan_descending(terms: np.ndarray) -> float:
    """Compensated sum in descending-magnitude order."""
    order = np.argsort(-np.abs(terms), kind="stable")
    total = 0.0
    carry = 0.0
    for t in terms[order]:
        y = t - carry
        s = total + y
        carry = (s - total) - y
        total = s
    return total


def _require_finite_measure(q11: np.ndarray) -> None:
    res = finiteness_residual(q11)
    if res > FINITENESS_RTOL * max(1.0, float(np.abs(q11).max())):
        raise FinitenessViolated(
            f"phase weight observes the uniform mode (|q11 u1|_max = {res:.3e}); "
            "project the all-ones direction out of q11"
        )


def _evaluate_modes(lam, tm, model, p, tau, perf, gamma, f_scale=1.0):
    """Double-mode-sum evaluation given a scaled-Laplacian eigensystem."""
    n = model.net.n
    rm = 1.0 / np.sqrt(model.m)
    ptil = tm.T @ (rm * p)
    q11t = tm.T @ (rm[:, None] * perf.q11 * rm[None, :]) @ tm
    q22t = tm.T @ (rm[:, None] * perf.q22 * rm[None, :]) @ tm

    eta0_sq = 2.0 / tau
    weight = eta0_sq * np.outer(ptil, ptil)
    lam_l = lam[:, None]
    lam_q = lam[None, :]
    pre, den, f_num, g_num = _kernel_parts(tau, gamma, lam_l, lam_q)
    degenerate = np.abs(den) < DEGENERATE_TOL
    f_mask = np.abs(q11t) >= COEF_TOL
    g_mask = np.abs(q22t) >= COEF_TOL

    if np.any(f_mask & degenerate):
        raise DegenerateDenominator(
            "phase kernel evaluated at a double zero mode with non-negligible weight"
        )
    safe_den = np.where(degenerate, 1.0, den)
    f_vals = pre * (f_num / safe_den + tau ** 3) * f_scale
    g_vals = np.where(degenerate, _g_zero_mode_limit(tau, gamma), pre * (g_num / safe_den))

    terms = np.concatenate([
        (weight * q11t * f_vals)[f_mask],
        (weight * q22t * g_vals)[g_mask],
    ])
    used = int(f_mask.sum() + g_mask.sum())
    return _kahan_descending(terms), {
        "terms_total": 2 * n * n,
        "terms_used": used,
        "terms_dropped": 2 * n * n - used,
        "eps": 0.0,
    }


def performance_generic(model: SwingModel, noise: NoiseSpec, perf: PerformanceSpec,
                        _f_scale: float = 1.0) -> MeasureResult:
    """Generic quadratic measure via the closed-form double mode sum.

    Requires a uniform damping-to-inertia ratio and a phase weight that
    does not observe the uniform mode. Independent-mode noise is the sum
    of one coherent evaluation per noisy node.

    ``_f_scale`` is a validation hook that scales the phase kernel; leave
    it at 1.0 for real evaluations.
    """
    gamma = uniform_ratio(model)
    _require_finite_measure(perf.q11)
    n = model.net.n
    if noise.p.shape != (n,):
        raise ValueError(f"amplitude vector must have shape ({n},)")
    if perf.n != n:
        raise ValueError(f"performance spec is {perf.n}x{perf.n}, network has {n} nodes")

    lam, tm = np.linalg.eigh(scaled_laplacian(model, 0.0))
    tm = _fix_signs(tm)

    if noise.mode == "independent":
        total = 0.0
        diag = None
        for alpha in np.flatnonzero(noise.p):
            p_alpha = np.zeros(n)
            p_alpha[alpha] = noise.p[alpha]
            value, diag = _evaluate_modes(lam, tm, model, p_alpha, noise.tau, perf, gamma, _f_scale)
            total += value
        if diag is None:  # p identically zero
            diag = {"terms_total": 0, "terms_used": 0, "terms_dropped": 0, "eps": 0.0}
        diag["channels"] = int(np.count_nonzero(noise.p))
        return MeasureResult(value=total, method="spectral", diagnostics=diag)

    value, diag = _evaluate_modes(lam, tm, model, noise.p, noise.tau, perf, gamma, _f_scale)
    return MeasureResult(value=value, method="spectral", diagnostics=diag)


def _require_uniform_md(model: SwingModel) -> tuple[float, float]:
    """Uniform inertia and damping, or NonUniformRatio naming the offender."""
    m0 = float(model.m[0])
    d0 = float(model.d[0])
    m_spread = float(np.abs(model.m - m0).max() / m0)
    d_spread = float(np.abs(model.d - d0).max() / d0)
    if max(m_spread, d_spread) >= 1e-12:
        raise NonUniformRatio(max(m_spread, d_spread))
    return m0, d0


def phase_coherence(model: SwingModel, alpha: int, p: float, tau: float) -> MeasureResult:
    """Phase-coherence measure for noise localized at one node.

    Single mode sum ``sum_l p^2 u_a^2 (m + d tau) / (lambda_l d
    (m/tau + d + lambda_l tau))`` over the non-zero Laplacian modes;
    derived for uniform inertia and damping.
    """
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    m, d = _require_uniform_md(model)
    spec = spectrum(laplacian(model.net))
    if not 0 <= alpha < spec.n:
        raise IndexError(f"node index out of range for n={spec.n}")
    lam = spec.eigenvalues[1:]
    u_sq = spec.eigenvectors[alpha, 1:] ** 2
    terms = p * p * u_sq * (m + d * tau) / (lam * d * (m / tau + d + lam * tau))
    value = _kahan_descending(terms)
    return MeasureResult(value=value, method="spectral",
                         diagnostics={"terms_total": spec.n - 1, "terms_used": spec.n - 1,
                                      "terms_dropped": 0, "eps": 0.0})


def small_tau_asymptote(model: SwingModel, alpha: int, p: float, tau: float) -> float:
    """Leading small-correlation-time law: (tau p^2/d) times the closeness bracket.

    The bracket is the node-dependent part of the inverse resistance
    closeness centrality, ``C_a^{-1} - Kf_1/N^2``.
    """
    _, d = _require_uniform_md(model)
    spec = spectrum(laplacian(model.net))
    return tau * p * p / d * laplacian_pinv_diag(spec, alpha)


def large_tau_asymptote(model: SwingModel, alpha: int, p: float) -> float:
    """Slow-noise saturation value: p^2 sum_l u_a^2 / lambda_l^2."""
    _require_uniform_md(model)
    spec = spectrum(laplacian(model.net))
    if not 0 <= alpha < spec.n:
        raise IndexError(f"node index out of range for n={spec.n}")
    u_sq = spec.eigenvectors[alpha, 1:] ** 2
    return float(p * p * np.sum(u_sq / spec.eigenvalues[1:] ** 2))
