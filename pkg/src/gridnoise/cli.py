"""Command-line front end.

Subcommands: ``measure`` (one evaluation by any method), ``sweep``
(correlation-time table with asymptote columns), ``rank`` (node
criticality), ``simulate`` (Monte-Carlo only) and ``validate`` (the
cross-method suite). Structured output goes to stdout or ``--out``;
errors are machine-readable JSON objects with exit code 1 for input
problems and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, gramian, mcsim, netgraph, spectral, sysmodel
from .errors import FinitenessViolated, InputError, NonUniformRatio, NumericalError
from .validate import DEFAULT_SIZES, run_validation

DEFAULT_TAU_GRID = (1e-3, 1e3, 25)
DEFAULT_TRAJ = 24


def _thread_count(n_items: int) -> int:
    cap = os.environ.get("GRIDNOISE_THREADS")
    if cap is not None:
        try:
            cap_n = int(cap)
        except ValueError:
            raise InputError(f"GRIDNOISE_THREADS must be an integer, got {cap!r}") from None
        return max(1, min(cap_n, n_items))
    return max(1, min(os.cpu_count() or 1, 4, n_items))


def _map_ordered(fn, items):
    """Evaluate fn over items, possibly in a thread pool, preserving order."""
    workers = _thread_count(len(items))
    if workers == 1 or len(items) < 8:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _read_text(path: str, what: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} file not found: {path}")
    return p.read_text(encoding="utf-8")


def _load_model(args) -> sysmodel.SwingModel:
    net = netgraph.load_network(_read_text(args.network, "network"))
    if getattr(args, "nodes", None):
        m, d = sysmodel.load_node_params(_read_text(args.nodes, "node-parameter"), net.n)
        return sysmodel.SwingModel(net=net, m=m, d=d)
    return sysmodel.SwingModel.uniform(net)


def _load_q_matrix(path: str, n: int, what: str) -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(_read_text(path, what).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(v) for v in line.replace(",", " ").split()])
        except ValueError:
            raise InputError(f"{what}: malformed numeric row at line {lineno}") from None
    q = np.asarray(rows, dtype=float)
    if q.shape != (n, n):
        raise InputError(f"{what}: expected a {n}x{n} matrix, got shape {q.shape}")
    return q


def _build_perf(args, n: int) -> tuple[str, sysmodel.PerformanceSpec]:
    name = args.measure
    if name == "phase-coherence":
        return name, sysmodel.PerformanceSpec.phase_coherence(n)
    if name == "freq-coherence":
        return name, sysmodel.PerformanceSpec.freq_coherence(n)
    if name == "custom":
        if not (args.q11 and args.q22):
            raise InputError("custom measure requires --q11 and --q22")
        try:
            perf = sysmodel.PerformanceSpec(
                q11=_load_q_matrix(args.q11, n, "q11"),
                q22=_load_q_matrix(args.q22, n, "q22"),
            )
        except ValueError as exc:
            raise InputError(str(exc)) from None
        res = sysmodel.finiteness_residual(perf.q11)
        if res > sysmodel.FINITENESS_RTOL * max(1.0, float(np.abs(perf.q11).max())):
            raise FinitenessViolated(
                f"q11 observes the uniform phase-shift mode (|q11 u1|_max = {res:.3e})"
            )
        return name, perf
    raise InputError(f"unknown measure {name!r}")


def _build_noise(args, n: int) -> sysmodel.NoiseSpec:
    if args.node is not None and args.amplitude_file:
        raise InputError("give either --node or --amplitude-file, not both")
    if args.node is not None:
        if not 0 <= args.node < n:
            raise InputError(f"--node {args.node} out of range for n={n}")
        p = np.zeros(n)
        p[args.node] = args.amplitude
    elif args.amplitude_file:
        p = np.loadtxt(args.amplitude_file, dtype=float).reshape(-1)
        if p.shape != (n,):
            raise InputError(f"amplitude file must hold {n} values, got {p.shape[0]}")
    else:
        raise InputError("specify the noisy node with --node or a vector with --amplitude-file")
    return sysmodel.NoiseSpec(p=p, tau=args.tau, mode=args.noise_mode)


def _tau_grid(args) -> list[float]:
    if getattr(args, "tau", None) is not None and getattr(args, "tau_grid", None):
        raise InputError("give either --tau or --tau-grid, not both")
    if getattr(args, "tau", None) is not None:
        return [float(args.tau)]
    spec = getattr(args, "tau_grid", None) or "{}:{}:{}".format(*DEFAULT_TAU_GRID)
    parts = spec.split(":")
    if len(parts) != 3:
        raise InputError(f"--tau-grid must be LO:HI:COUNT, got {spec!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise InputError(f"--tau-grid must be LO:HI:COUNT numerics, got {spec!r}") from None
    if count < 1:
        raise InputError("--tau-grid count must be at least 1")
    if not (lo > 0 and hi > 0):
        raise InputError("--tau-grid bounds must be positive")
    if count == 1:
        return [lo]
    if not hi > lo:
        raise InputError("--tau-grid needs HI > LO")
    return [float(t) for t in np.logspace(math.log10(lo), math.log10(hi), count)]


def _gamma_or_none(model: sysmodel.SwingModel) -> float | None:
    try:
        return sysmodel.uniform_ratio(model)
    except NonUniformRatio:
        return None


def _network_payload(model: sysmodel.SwingModel) -> dict:
    return {
        "n": model.net.n,
        "edges": [[i, j, float(b)] for i, j, b in model.net.edges],
    }


def _sim_config(args, model: sysmodel.SwingModel, tau: float) -> mcsim.SimConfig:
    lam_max = float(np.linalg.eigvalsh(sysmodel.scaled_laplacian(model, 0.0)).max())
    gamma_max = float((model.d / model.m).max())
    cap = 0.1 * min(2.0 * math.pi / math.sqrt(lam_max) if lam_max > 0 else math.inf,
                    1.0 / gamma_max)
    dt = args.dt if args.dt is not None else 0.5 * min(tau / 10.0, cap)
    relax = max(tau, 1.0 / (model.d / model.m).min(), mcsim.slowest_relaxation(model))
    t_burn = args.t_burn if args.t_burn is not None else 12.0 * relax
    t_measure = args.t_measure if args.t_measure is not None else 1000.0 * relax
    return mcsim.SimConfig(dt=dt, t_burn=t_burn, t_measure=t_measure,
                           n_traj=args.traj, seed=args.seed)


def _method_result(method: str, model, noise, perf, args) -> dict:
    if method == "spectral":
        r = spectral.performance_generic(model, noise, perf)
        return {"value": float(r.value), "diagnostics": r.diagnostics}
    if method == "oracle":
        r = gramian.performance_oracle(model, noise, perf)
        return {"value": float(r.value), "diagnostics": r.diagnostics}
    if method == "mc":
        cfg = _sim_config(args, model, noise.tau)
        est = mcsim.simulate_variance(model, noise, perf, cfg)
        return {
            "value": float(est.mean),
            "diagnostics": {
                "stderr": float(est.stderr),
                "n_effective": int(est.n_effective),
                "dt": cfg.dt,
                "t_burn": cfg.t_burn,
                "t_measure": cfg.t_measure,
                "seed": cfg.seed,
            },
        }
    raise InputError(f"unknown method {method!r}")


def _rel_dev(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale else 0.0


def cmd_measure(args) -> tuple[dict, int]:
    model = _load_model(args)
    _, perf = _build_perf(args, model.net.n)
    if args.tau is None:
        raise InputError("measure requires --tau")
    noise = _build_noise(args, model.net.n)
    methods = ["spectral", "oracle", "mc"] if args.method == "all" else [args.method]
    results = {m: _method_result(m, model, noise, perf, args) for m in methods}
    deviations = None
    if args.method == "all":
        deviations = {
            f"{a}-{b}": _rel_dev(results[a]["value"], results[b]["value"])
            for a, b in (("spectral", "oracle"), ("spectral", "mc"), ("oracle", "mc"))
        }
    payload = {
        "command": "measure",
        "network": _network_payload(model),
        "gamma": _gamma_or_none(model),
        "tau": float(args.tau),
        "measure": args.measure,
        "methods": results,
        "deviations": deviations,
    }
    return payload, 0


def cmd_simulate(args) -> tuple[dict, int]:
    model = _load_model(args)
    _, perf = _build_perf(args, model.net.n)
    if args.tau is None:
        raise InputError("simulate requires --tau")
    noise = _build_noise(args, model.net.n)
    payload = {
        "command": "simulate",
        "network": _network_payload(model),
        "gamma": _gamma_or_none(model),
        "tau": float(args.tau),
        "measure": args.measure,
        "methods": {"mc": _method_result("mc", model, noise, perf, args)},
        "deviations": None,
    }
    return payload, 0


def _sweep_row(model, perf, args, tau: float, uniform_md: bool) -> dict:
    noise = sysmodel.NoiseSpec(p=_build_noise_vector(args, model.net.n), tau=tau,
                               mode=args.noise_mode)
    result = _method_result(args.method, model, noise, perf, args)
    row = {
        "tau": float(tau),
        "value": result["value"],
        "small_tau_asymptote": None,
        "large_tau_asymptote": None,
        "ratio_small": None,
        "ratio_large": None,
    }
    if uniform_md and args.node is not None:
        small = spectral.small_tau_asymptote(model, args.node, args.amplitude, tau)
        large = spectral.large_tau_asymptote(model, args.node, args.amplitude)
        row["small_tau_asymptote"] = float(small)
        row["large_tau_asymptote"] = float(large)
        row["ratio_small"] = row["value"] / small if small else None
        row["ratio_large"] = row["value"] / large if large else None
    return row


def _build_noise_vector(args, n: int) -> np.ndarray:
    if args.node is not None:
        p = np.zeros(n)
        p[args.node] = args.amplitude
        return p
    if args.amplitude_file:
        p = np.loadtxt(args.amplitude_file, dtype=float).reshape(-1)
        if p.shape != (n,):
            raise InputError(f"amplitude file must hold {n} values, got {p.shape[0]}")
        return p
    raise InputError("specify the noisy node with --node or a vector with --amplitude-file")


def _uniform_md(model: sysmodel.SwingModel) -> bool:
    return (float(np.abs(model.m - model.m[0]).max()) <= 1e-12 * float(model.m[0])
            and float(np.abs(model.d - model.d[0]).max()) <= 1e-12 * float(model.d[0]))


def cmd_sweep(args) -> tuple[dict, int]:
    if args.method == "all":
        raise InputError("sweep evaluates one method per run; choose spectral, oracle or mc")
    model = _load_model(args)
    _, perf = _build_perf(args, model.net.n)
    taus = _tau_grid(args)
    if args.node is None and not args.amplitude_file:
        raise InputError("specify the noisy node with --node or a vector with --amplitude-file")
    uniform_md = _uniform_md(model)
    rows = _map_ordered(lambda t: _sweep_row(model, perf, args, t, uniform_md), taus)
    payload = {
        "command": "sweep",
        "network": _network_payload(model),
        "gamma": _gamma_or_none(model),
        "measure": args.measure,
        "method": args.method,
        "rows": rows,
    }
    return payload, 0


def rank_order(values, rel_tol: float = 1e-9) -> list[int]:
    """Node order by descending value; near-ties resolved by node index.

    Values within ``rel_tol`` of each other (relative to the largest
    magnitude) count as tied, so symmetric nodes rank deterministically.
    """
    values = np.asarray(values, dtype=float)
    scale = float(np.abs(values).max()) or 1.0
    quantized = np.round(values / (scale * rel_tol)).astype(np.int64)
    return sorted(range(values.size), key=lambda i: (-quantized[i], i))


def cmd_rank(args) -> tuple[dict, int]:
    model = _load_model(args)
    if not _uniform_md(model):
        raise NonUniformRatio(float(np.abs(model.d / model.m - model.d[0] / model.m[0]).max()))
    taus = _tau_grid(args)
    spec = netgraph.spectrum(netgraph.laplacian(model.net))
    n = model.net.n

    def node_entry(alpha: int) -> dict:
        return {
            "node": alpha,
            "closeness": float(netgraph.closeness_centrality(spec, alpha)),
            "closeness_inverse_bracket": float(netgraph.laplacian_pinv_diag(spec, alpha)),
            "p_phi": [float(spectral.phase_coherence(model, alpha, args.amplitude, t).value)
                      for t in taus],
        }

    entries = _map_ordered(node_entry, list(range(n)))
    order = rank_order([e["p_phi"][0] for e in entries])
    payload = {
        "command": "rank",
        "network": _network_payload(model),
        "gamma": _gamma_or_none(model),
        "amplitude": float(args.amplitude),
        "taus": [float(t) for t in taus],
        "nodes": [entries[i] for i in order],
    }
    return payload, 0


def cmd_validate(args) -> tuple[str, int]:
    sizes = DEFAULT_SIZES
    if args.sizes:
        try:
            sizes = tuple(int(s) for s in args.sizes.split(","))
        except ValueError:
            raise InputError(f"--sizes must be a comma list of integers, got {args.sizes!r}") from None
        if any(s < 2 for s in sizes):
            raise InputError("--sizes entries must be at least 2")
    report = run_validation(seed=args.seed, sizes=sizes, f_perturbation=args.perturb_f)
    return report.to_text(), 0 if report.passed else 1


def _sweep_csv(payload: dict) -> str:
    cols = ["tau", "value", "small_tau_asymptote", "large_tau_asymptote",
            "ratio_small", "ratio_large"]
    lines = [",".join(cols)]
    for row in payload["rows"]:
        lines.append(",".join("" if row[c] is None else repr(row[c]) for c in cols))
    return "\n".join(lines) + "\n"


def _rank_csv(payload: dict) -> str:
    taus = payload["taus"]
    cols = ["node", "closeness", "closeness_inverse_bracket"] + [
        f"p_phi@{repr(t)}" for t in taus
    ]
    lines = [",".join(cols)]
    for e in payload["nodes"]:
        cells = [str(e["node"]), repr(e["closeness"]), repr(e["closeness_inverse_bracket"])]
        cells += [repr(v) for v in e["p_phi"]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _measure_csv(payload: dict) -> str:
    lines = ["method,value,stderr"]
    for name, res in payload["methods"].items():
        stderr = res["diagnostics"].get("stderr")
        lines.append(",".join([name, repr(res["value"]),
                               "" if stderr is None else repr(stderr)]))
    return "\n".join(lines) + "\n"


def _render(payload, args) -> str:
    if isinstance(payload, str):
        return payload
    if getattr(args, "format", "json") == "csv":
        kind = payload["command"]
        if kind == "sweep":
            return _sweep_csv(payload)
        if kind == "rank":
            return _rank_csv(payload)
        return _measure_csv(payload)
    return json.dumps(payload, indent=2) + "\n"


def _emit(text: str, args) -> None:
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _error_payload(exc: Exception) -> dict:
    hint = None
    if isinstance(exc, NonUniformRatio):
        hint = "the Gramian oracle handles non-uniform ratios: retry with --method oracle"
    return {"error": {"type": type(exc).__name__, "message": str(exc), "hint": hint}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridnoise",
        description="Quadratic transient performance of swing dynamics under colored noise.",
    )
    parser.add_argument("--version", action="version", version=f"gridnoise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    io = argparse.ArgumentParser(add_help=False)
    io.add_argument("--out", help="write output to this path instead of stdout")
    io.add_argument("--format", choices=["json", "csv"], default="json")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--network", required=True, help="edge-list file: lines 'i j b'")
    system.add_argument("--nodes", help="node-parameter file: lines 'i m_i d_i'")

    noise = argparse.ArgumentParser(add_help=False)
    noise.add_argument("--node", type=int, help="inject noise at this node")
    noise.add_argument("--amplitude", type=float, default=1.0, help="injection amplitude")
    noise.add_argument("--amplitude-file", help="per-node amplitude vector file")
    noise.add_argument("--noise-mode", choices=["coherent", "independent"], default="coherent")

    measure_spec = argparse.ArgumentParser(add_help=False)
    measure_spec.add_argument("--measure", default="phase-coherence",
                              choices=["phase-coherence", "freq-coherence", "custom"])
    measure_spec.add_argument("--q11", help="phase weight matrix file (custom measure)")
    measure_spec.add_argument("--q22", help="frequency weight matrix file (custom measure)")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--dt", type=float, help="simulation step (default: auto)")
    sim.add_argument("--traj", type=int, default=DEFAULT_TRAJ, help="trajectory count")
    sim.add_argument("--t-burn", type=float, help="burn-in horizon (default: auto)")
    sim.add_argument("--t-measure", type=float, help="averaging horizon (default: auto)")

    p = sub.add_parser("measure", parents=[io, system, noise, measure_spec, sim],
                       help="evaluate the measure at one correlation time")
    p.add_argument("--tau", type=float, required=True, help="noise correlation time")
    p.add_argument("--method", choices=["spectral", "oracle", "mc", "all"], default="spectral")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sweep", parents=[io, system, noise, measure_spec, sim],
                       help="tabulate the measure over a correlation-time grid")
    p.add_argument("--tau", type=float, help="single correlation time")
    p.add_argument("--tau-grid", help="LO:HI:COUNT logarithmic grid "
                                      f"(default {DEFAULT_TAU_GRID[0]}:{DEFAULT_TAU_GRID[1]}:{DEFAULT_TAU_GRID[2]})")
    p.add_argument("--method", choices=["spectral", "oracle", "mc"], default="spectral")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rank", parents=[io, system],
                       help="rank nodes by criticality under localized noise")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--tau", type=float, help="single correlation time")
    p.add_argument("--tau-grid", help="LO:HI:COUNT logarithmic grid")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("simulate", parents=[io, system, noise, measure_spec, sim],
                       help="Monte-Carlo estimate of the measure")
    p.add_argument("--tau", type=float, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", parents=[io],
                       help="run the randomized cross-method validation suite")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--sizes", help="comma list of graph sizes (default 3,4,5,6,7,8)")
    p.add_argument("--perturb-f", type=float, default=1.0,
                   help="self-test hook: scale the phase kernel to prove the "
                        "suite detects deviations")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, code = args.func(args)
    except InputError as exc:
        sys.stdout.write(json.dumps(_error_payload(exc), indent=2) + "\n")
        return 1
    except NumericalError as exc:
        sys.stdout.write(json.dumps(_error_payload(exc), indent=2) + "\n")
        return 2
    except np.linalg.LinAlgError as exc:
        sys.stdout.write(json.dumps(_error_payload(exc), indent=2) + "\n")
        return 2
    except (OSError, ValueError) as exc:
        sys.stdout.write(json.dumps(_error_payload(exc), indent=2) + "\n")
        return 1
    _emit(_render(payload, args), args)
    return code


if __name__ == "__main__":
    sys.exit(main())
