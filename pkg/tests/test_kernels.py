"""Backend selection and kernel equivalence."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gridnoise import kernels
from gridnoise.errors import InputError
from gridnoise.mcsim import OVERFLOW_GUARD


def test_default_backend_resolves():
    kern = kernels.get_backend(None)
    assert hasattr(kern, "swing_chunk")
    assert kernels.DEFAULT_BACKEND in kernels.available_backends()


def test_python_backend_always_available():
    assert kernels.get_backend("python").BACKEND == "python"


def test_unknown_backend_rejected():
    with pytest.raises(ValueError, match="unknown backend"):
        kernels.get_backend("fortran")


def test_compiled_request_without_extension(monkeypatch):
    monkeypatch.setattr(kernels, "_speedups", None)
    with pytest.raises(InputError, match="not available"):
        kernels.get_backend("compiled")


@pytest.mark.skipif(len(kernels.available_backends()) < 2,
                    reason="compiled kernel not built")
def test_chunk_kernels_step_identically():
    """Same states and accumulators from both backends on a shared workload."""
    rng = np.random.default_rng(3)
    n, n_traj, n_chan, steps = 3, 4, 2, 200
    lap = np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    inv_m = np.array([1.0, 0.5, 2.0])
    dfac = 1.0 / (1.0 + 0.01 * np.array([1.0, 2.0, 0.5]))
    p_mat = rng.standard_normal((n, n_chan))
    a = rng.standard_normal((n, n))
    q11 = a @ a.T
    q22 = np.zeros((n, n))
    xi = rng.standard_normal((steps, n_traj, n_chan))
    decay = math.exp(-0.01)
    ou_b = math.sqrt(1.0 - decay * decay)

    states = {}
    for backend in kernels.available_backends():
        phi = np.zeros((n_traj, n))
        omega = np.zeros((n_traj, n))
        eta = np.zeros((n_traj, n_chan))
        acc = np.zeros(n_traj)
        executed = kernels.get_backend(backend).swing_chunk(
            phi, omega, eta, xi, lap, inv_m, dfac, p_mat, q11, q22,
            0.01, decay, ou_b, True, False, True, acc, OVERFLOW_GUARD)
        assert executed == steps
        states[backend] = (phi, omega, eta, acc)

    for a_arr, b_arr in zip(states["compiled"], states["python"], strict=True):
        assert a_arr == pytest.approx(b_arr, rel=1e-11, abs=1e-13)
