# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stepping kernel for the stochastic swing simulation.

Mirrors ``_fallback.swing_chunk``: same update order, plain C loops over
trajectories and nodes instead of vectorized array ops.
"""

from libc.math cimport fabs

BACKEND = "compiled"


def swing_chunk(double[:, ::1] phi, double[:, ::1] omega, double[:, ::1] eta,
                const double[:, :, ::1] xi, const double[:, ::1] lap,
                const double[::1] inv_m, const double[::1] dfac,
                const double[:, ::1] p_mat, const double[:, ::1] q11,
                const double[:, ::1] q22, double dt, double ou_a, double ou_b,
                bint has_q11, bint has_q22, bint measure, double[::1] acc,
                double guard):
    cdef Py_ssize_t n_steps = xi.shape[0]
    cdef Py_ssize_t n_traj = phi.shape[0]
    cdef Py_ssize_t n = phi.shape[1]
    cdef Py_ssize_t n_chan = eta.shape[1]
    cdef Py_ssize_t k, t, i, j, c
    cdef double force, row, mean, quad, worst, v
    cdef bint blown = 0

    with nogil:
        for k in range(n_steps):
            worst = 0.0
            for t in range(n_traj):
                for c in range(n_chan):
                    eta[t, c] = ou_a * eta[t, c] + ou_b * xi[k, t, c]
                for i in range(n):
                    force = 0.0
                    for c in range(n_chan):
                        force += p_mat[i, c] * eta[t, c]
                    row = 0.0
                    for j in range(n):
                        row += lap[i, j] * phi[t, j]
                    omega[t, i] = (omega[t, i] + dt * (force - row) * inv_m[i]) * dfac[i]
                mean = 0.0
                for i in range(n):
                    phi[t, i] = phi[t, i] + dt * omega[t, i]
                    mean += phi[t, i]
                mean /= n
                for i in range(n):
                    phi[t, i] -= mean
                    v = fabs(phi[t, i])
                    if v > worst or v != v:
                        worst = v if v == v else guard + 1.0
                    v = fabs(omega[t, i])
                    if v > worst or v != v:
                        worst = v if v == v else guard + 1.0
            if not worst <= guard:
                blown = 1
                break
            if measure:
                for t in range(n_traj):
                    quad = 0.0
                    if has_q11:
                        for i in range(n):
                            row = 0.0
                            for j in range(n):
                                row += q11[i, j] * phi[t, j]
                            quad += phi[t, i] * row
                    if has_q22:
                        for i in range(n):
                            row = 0.0
                            for j in range(n):
                                row += q22[i, j] * omega[t, j]
                            quad += omega[t, i] * row
                    acc[t] += quad
    if blown:
        return k + 1
    return n_steps
