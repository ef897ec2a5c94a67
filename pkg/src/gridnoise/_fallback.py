"""NumPy reference implementation of the simulation stepping kernel.

Semantically identical to the compiled kernel in ``_speedups``: one
semi-implicit step per loop iteration, vectorized across trajectories.
Used when the extension is unavailable and as the baseline in the kernel
benchmark.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def swing_chunk(phi, omega, eta, xi, lap, inv_m, dfac, p_mat, q11, q22,
                dt, ou_a, ou_b, has_q11, has_q22, measure, acc, guard):
    """Advance all trajectories through one chunk of steps, in place.

    Per step: exact filter update, frequency update implicit in damping,
    explicit phase update, mean-phase recentering, then accumulation of
    the quadratic output into ``acc`` when measuring. Returns the number
    of steps executed, stopping early once any state magnitude fails the
    overflow guard (NaN fails too).
    """
    n_steps = xi.shape[0]
    for k in range(n_steps):
        eta *= ou_a
        eta += ou_b * xi[k]
        force = eta @ p_mat.T
        force -= phi @ lap
        omega += dt * force * inv_m
        omega *= dfac
        phi += dt * omega
        phi -= phi.mean(axis=1, keepdims=True)
        worst = max(np.abs(phi).max(), np.abs(omega).max())
        if not worst <= guard:
            return k + 1
        if measure:
            if has_q11:
                acc += np.einsum("ti,ij,tj->t", phi, q11, phi)
            if has_q22:
                acc += np.einsum("ti,ij,tj->t", omega, q22, omega)
    return n_steps
