"""Network ingestion, Laplacian spectra and resistance-distance analytics.

A network is an undirected, connected graph with strictly positive edge
weights (per-unit susceptances). Everything downstream works off the
eigen-decomposition of its Laplacian, so this module owns that
decomposition and the graph-theoretic node metrics derived from it:
resistance distance, resistance closeness centrality and the Kirchhoff
index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NetworkFormatError

__all__ = [
    "Network",
    "LaplacianSpectrum",
    "load_network",
    "laplacian",
    "spectrum",
    "resistance_distance",
    "closeness_centrality",
    "kirchhoff_index",
    "laplacian_pinv_diag",
]

#: |lambda_1| below this fraction of the largest eigenvalue counts as the
#: zero mode; larger values mean the matrix was not a connected-graph
#: Laplacian.
ZERO_MODE_RTOL = 1e-9


@dataclass(frozen=True)
class Network:
    """Undirected weighted graph with dense 0-based integer node ids.

    ``edges`` holds ``(i, j, b)`` triples with ``b > 0``; at most one edge
    per unordered pair, no self-loops, and the graph must be connected.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n < 1:
            raise NetworkFormatError(f"node count must be positive, got {self.n}")
        object.__setattr__(self, "edges", tuple((int(i), int(j), float(b)) for i, j, b in self.edges))
        seen = set()
        for i, j, b in self.edges:
            if i == j:
                raise NetworkFormatError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise NetworkFormatError(f"edge ({i},{j}) out of range for n={self.n}")
            if not b > 0.0:
                raise NetworkFormatError(f"edge ({i},{j}) has non-positive weight {b}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise NetworkFormatError(f"duplicate edge ({key[0]},{key[1]})")
            seen.add(key)
        if not self._connected():
            raise NetworkFormatError("graph is not connected")

    def _connected(self) -> bool:
        if self.n == 1:
            return True
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j, _ in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            for k in adj[stack.pop()]:
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        return len(seen) == self.n


@dataclass(frozen=True)
class LaplacianSpectrum:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Laplacian.

    Column ``l`` of ``eigenvectors`` belongs to ``eigenvalues[l]``; the
    first column is the uniform mode with eigenvalue zero. Arrays are
    frozen after construction so instances are safe to share.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        vec = np.asarray(self.eigenvectors, dtype=float)
        n = lam.shape[0]
        if vec.shape != (n, n):
            raise ValueError(f"eigenvector matrix shape {vec.shape} does not match {n} eigenvalues")
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be ascending")
        scale = max(lam[-1], 1.0) if n else 1.0
        if abs(lam[0]) >= ZERO_MODE_RTOL * scale:
            raise ValueError(f"lowest eigenvalue {lam[0]:.3e} is not a zero mode")
        if n > 1 and lam[1] <= ZERO_MODE_RTOL * scale:
            raise ValueError("second eigenvalue is not strictly positive (disconnected graph?)")
        for a in (lam, vec):
            a.flags.writeable = False
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", vec)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def load_network(text: str) -> Network:
    """Parse an edge-list document into a validated :class:`Network`.

    One edge per line, ``i j b`` separated by whitespace or commas; ``#``
    starts a comment. Node ids must be the dense integers ``0..N-1``.
    """
    edges = []
    seen: set[tuple[int, int]] = set()
    max_node = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 3:
            raise NetworkFormatError(f"expected 'i j b', got {raw!r}", line=lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise NetworkFormatError(f"node ids must be integers, got {raw!r}", line=lineno) from None
        try:
            b = float(parts[2])
        except ValueError:
            raise NetworkFormatError(f"weight must be numeric, got {raw!r}", line=lineno) from None
        if i < 0 or j < 0:
            raise NetworkFormatError(f"negative node id in {raw!r}", line=lineno)
        if i == j:
            raise NetworkFormatError(f"self-loop at node {i}", line=lineno)
        if not math.isfinite(b) or b <= 0.0:
            raise NetworkFormatError(f"weight must be finite and positive, got {b}", line=lineno)
        key = (min(i, j), max(i, j))
        if key in seen:
            raise NetworkFormatError(f"duplicate edge ({key[0]},{key[1]})", line=lineno)
        seen.add(key)
        edges.append((i, j, b))
        max_node = max(max_node, i, j)
    if not edges:
        raise NetworkFormatError("no edges found")
    return Network(n=max_node + 1, edges=tuple(edges))


def laplacian(net: Network) -> np.ndarray:
    """Weighted graph Laplacian: off-diagonals -b_ij, diagonals row sums.

    The diagonal is the correctly rounded sum of the incident weights
    (``math.fsum``), so rows sum to zero identically whenever that sum is
    exactly representable (in particular for integer weights) and to a few
    ulps otherwise.
    """
    n = net.n
    lap = np.zeros((n, n))
    incident: list[list[float]] = [[] for _ in range(n)]
    for i, j, b in net.edges:
        lap[i, j] -= b
        lap[j, i] -= b
        incident[i].append(b)
        incident[j].append(b)
    for i in range(n):
        lap[i, i] = math.fsum(incident[i])
    return lap


def _fix_signs(vec: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vec), axis=0)
    signs = np.sign(vec[idx, np.arange(vec.shape[1])])
    signs[signs == 0] = 1.0
    return vec * signs


def spectrum(lap: np.ndarray) -> LaplacianSpectrum:
    """Diagonalize a symmetric Laplacian-like matrix.

    Returns ascending eigenvalues and an orthogonal eigenvector matrix
    with a deterministic sign convention (largest-magnitude entry of each
    column positive). Raises ``numpy.linalg.LinAlgError`` if the solver
    fails and ``ValueError`` if the result is not a connected-graph
    spectrum.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {lap.shape}")
    if not np.allclose(lap, lap.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(lap).max())):
        raise ValueError("matrix is not symmetric")
    lam, vec = np.linalg.eigh(lap)
    return LaplacianSpectrum(eigenvalues=lam, eigenvectors=_fix_signs(vec))


def resistance_distance(spec: LaplacianSpectrum, i: int, j: int) -> float:
    """Effective resistance between nodes i and j.

    Spectral form: sum over the non-zero modes of
    ``(u_i - u_j)^2 / lambda``. Symmetric, and zero iff ``i == j``.
    """
    n = spec.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node index out of range for n={n}")
    if i == j:
        return 0.0
    diff = spec.eigenvectors[i, 1:] - spec.eigenvectors[j, 1:]
    return float(np.sum(diff * diff / spec.eigenvalues[1:]))


def laplacian_pinv_diag(spec: LaplacianSpectrum, alpha: int) -> float:
    """Diagonal pseudoinverse entry: sum over non-zero modes of u_a^2/lambda.

    This is the node-dependent part of the inverse closeness centrality,
    i.e. the bracket ``C_a^{-1} - Kf_1/N^2``.
    """
    if not 0 <= alpha < spec.n:
        raise IndexError(f"node index out of range for n={spec.n}")
    u = spec.eigenvectors[alpha, 1:]
    return float(np.sum(u * u / spec.eigenvalues[1:]))


def closeness_centrality(spec: LaplacianSpectrum, alpha: int) -> float:
    """Resistance-distance closeness centrality of a node.

    The inverse is the mean resistance distance from ``alpha`` to all
    nodes: ``C^{-1} = sum_l u_a^2/lambda_l + (1/N) sum_l 1/lambda_l``.
    """
    if not 0 <= alpha < spec.n:
        raise IndexError(f"node index out of range for n={spec.n}")
    inv = laplacian_pinv_diag(spec, alpha) + np.sum(1.0 / spec.eigenvalues[1:]) / spec.n
    return float(1.0 / inv)


def kirchhoff_index(spec: LaplacianSpectrum) -> float:
    """Kirchhoff index: N times the sum of inverse non-zero eigenvalues."""
    return float(spec.n * np.sum(1.0 / spec.eigenvalues[1:]))
