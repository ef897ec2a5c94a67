"""Benchmark the compiled stepping kernel against the NumPy fallback.

Times the raw chunk kernel on a synthetic workload and the end-to-end
variance estimator on the two-node reference system, printing one row per
backend plus the speedup. Run as ``python benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from gridnoise.kernels import available_backends, get_backend
from gridnoise.mcsim import OVERFLOW_GUARD, SimConfig, simulate_variance
from gridnoise.netgraph import Network, laplacian
from gridnoise.sysmodel import NoiseSpec, PerformanceSpec, SwingModel


def bench_chunk(backend: str, n: int, n_traj: int, steps: int, repeats: int) -> float:
    kern = get_backend(backend)
    rng = np.random.default_rng(0)
    net = Network(n=n, edges=tuple((i, i + 1, 1.0) for i in range(n - 1)))
    lap = laplacian(net)
    inv_m = np.ones(n)
    dfac = np.full(n, 1.0 / (1.0 + 0.01))
    p_mat = np.zeros((n, 1))
    p_mat[0, 0] = 1.0
    perf = PerformanceSpec.phase_coherence(n)
    q11 = np.ascontiguousarray(perf.q11)
    q22 = np.ascontiguousarray(perf.q22)
    decay = math.exp(-0.01)
    ou_b = math.sqrt(1.0 - decay * decay)
    best = math.inf
    for _ in range(repeats):
        phi = np.zeros((n_traj, n))
        omega = np.zeros((n_traj, n))
        eta = np.zeros((n_traj, 1))
        acc = np.zeros(n_traj)
        xi = rng.standard_normal((steps, n_traj, 1))
        start = time.perf_counter()
        kern.swing_chunk(phi, omega, eta, xi, lap, inv_m, dfac, p_mat, q11, q22,
                         0.01, decay, ou_b, True, False, True, acc, OVERFLOW_GUARD)
        best = min(best, time.perf_counter() - start)
    return best


def bench_estimator(backend: str) -> float:
    net = Network(n=2, edges=((0, 1, 1.0),))
    model = SwingModel.uniform(net)
    noise = NoiseSpec.single_node(2, 0, 1.0, 1.0)
    perf = PerformanceSpec.phase_coherence(2)
    cfg = SimConfig(dt=0.01, t_burn=50.0, t_measure=3000.0, n_traj=16, seed=1)
    start = time.perf_counter()
    simulate_variance(model, noise, perf, cfg, backend=backend)
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=8)
    parser.add_argument("--traj", type=int, default=32)
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    print(f"\nchunk kernel (N={args.nodes}, traj={args.traj}, steps={args.steps}):")
    chunk = {}
    for b in backends:
        chunk[b] = bench_chunk(b, args.nodes, args.traj, args.steps, args.repeats)
        rate = args.steps * args.traj / chunk[b] / 1e6
        print(f"  {b:<9} {chunk[b] * 1e3:9.1f} ms   {rate:7.2f} M traj-steps/s")
    print("\nend-to-end variance estimate (two-node reference):")
    full = {}
    for b in backends:
        full[b] = bench_estimator(b)
        print(f"  {b:<9} {full[b]:9.2f} s")
    if len(backends) == 2:
        print(f"\nspeedup compiled vs python: chunk {chunk['python'] / chunk['compiled']:.1f}x, "
              f"end-to-end {full['python'] / full['compiled']:.1f}x")


if __name__ == "__main__":
    main()
