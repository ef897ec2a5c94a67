"""Transient performance of network swing dynamics under colored noise.

Three independent evaluation routes for the same quadratic measures:
closed-form mode sums (:mod:`gridnoise.spectral`), an observability-Gramian
oracle (:mod:`gridnoise.gramian`) and a Monte-Carlo simulator
(:mod:`gridnoise.mcsim`), on top of graph analytics in
:mod:`gridnoise.netgraph` and the system model in :mod:`gridnoise.sysmodel`.
"""

from . import errors
from .gramian import performance_oracle
from .mcsim import SimConfig, VarianceEstimate, estimate_correlator, simulate_variance
from .netgraph import (
    LaplacianSpectrum,
    Network,
    closeness_centrality,
    kirchhoff_index,
    laplacian,
    laplacian_pinv_diag,
    load_network,
    resistance_distance,
    spectrum,
)
from .spectral import (
    MeasureResult,
    ModePair,
    f_kernel,
    g_kernel,
    large_tau_asymptote,
    mode_eigenvalues,
    performance_generic,
    phase_coherence,
    small_tau_asymptote,
)
from .sysmodel import NoiseSpec, PerformanceSpec, SwingModel, build_augmented, q_weighted

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Network",
    "LaplacianSpectrum",
    "load_network",
    "laplacian",
    "spectrum",
    "resistance_distance",
    "closeness_centrality",
    "kirchhoff_index",
    "laplacian_pinv_diag",
    "SwingModel",
    "NoiseSpec",
    "PerformanceSpec",
    "build_augmented",
    "q_weighted",
    "ModePair",
    "MeasureResult",
    "mode_eigenvalues",
    "f_kernel",
    "g_kernel",
    "performance_generic",
    "phase_coherence",
    "small_tau_asymptote",
    "large_tau_asymptote",
    "performance_oracle",
    "SimConfig",
    "VarianceEstimate",
    "simulate_variance",
    "estimate_correlator",
    "__version__",
]
