"""Weighted communication graphs and their Laplacian algebra.

Everything downstream (switching schedules, the controller, the verification
monitors) works with symmetric nonnegatively weighted graphs on n agents and
dense numpy matrices built from them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WeightedGraph",
    "GraphFamily",
    "laplacian",
    "generalized_laplacian",
    "centering_matrix",
    "offdiag_norm",
    "union_graph",
    "union_laplacian",
    "is_connected",
    "min_positive_eigenvalue",
    "connected_subsets",
]

_SYM_TOL = 1e-9


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph given by its symmetric weight matrix.

    Parameters
    ----------
    weights : (n, n) array_like
        Symmetric, nonnegative, zero diagonal. Entry (i, j) is the coupling
        weight between agents i and j; zero means no edge.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weight matrix must be square")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(np.diag(w) != 0.0):
            raise ValueError("self-loops are not allowed (diagonal must be zero)")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        if not np.array_equal(w, w.T):
            raise ValueError("weight matrix must be symmetric")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges, default_weight: float = 1.0) -> "WeightedGraph":
        """Build a graph on n agents from (i, j) or (i, j, w) tuples, 0-based."""
        w = np.zeros((n, n))
        for edge in edges:
            if len(edge) == 2:
                i, j = edge
                wt = default_weight
            else:
                i, j, wt = edge
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) is not allowed")
            if not (wt > 0.0):
                raise ValueError(f"edge ({i}, {j}) needs a positive weight, got {wt}")
            if w[i, j] != 0.0:
                raise ValueError(f"duplicate edge ({i}, {j})")
            w[i, j] = w[j, i] = wt
        return cls(w)

    def edge_count(self) -> int:
        return int(np.count_nonzero(self.weights) // 2)


@dataclass(frozen=True)
class GraphFamily:
    """Finite family of graphs on a common agent set, indexed by integer mode."""

    graphs: dict[int, WeightedGraph] = field(default_factory=dict)

    def __post_init__(self):
        if not self.graphs:
            raise ValueError("graph family must not be empty")
        sizes = {g.n for g in self.graphs.values()}
        if len(sizes) != 1:
            raise ValueError(f"all graphs must share one agent count, got {sorted(sizes)}")
        object.__setattr__(self, "graphs", dict(self.graphs))

    @property
    def n(self) -> int:
        return next(iter(self.graphs.values())).n

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(sorted(self.graphs))

    def __getitem__(self, mode: int) -> WeightedGraph:
        return self.graphs[mode]


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Standard graph Laplacian: row-sum diagonal minus the weight matrix."""
    w = g.weights
    return np.diag(w.sum(axis=1)) - w


def generalized_laplacian(g: WeightedGraph, b: np.ndarray) -> np.ndarray:
    """Laplacian-shaped matrix with entries modulated by a coupling matrix.

    Diagonal entry i is sum_j a_ij * b_ij and off-diagonal entry (i, j) is
    -a_ij * b_ij. With b the all-ones matrix this reduces to ``laplacian``.
    The result is asymmetric whenever b is.
    """
    w = g.weights
    b = np.asarray(b, dtype=float)
    if b.shape != w.shape:
        raise ValueError(f"coupling matrix shape {b.shape} does not match graph {w.shape}")
    prod = w * b
    return np.diag(prod.sum(axis=1)) - prod


def centering_matrix(n: int) -> np.ndarray:
    """Projector removing the average: I - (1/n) * ones."""
    if n < 1:
        raise ValueError("need at least one agent")
    return np.eye(n) - np.full((n, n), 1.0 / n)


def offdiag_norm(b: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part of a square matrix."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("expected a square matrix")
    off = b - np.diag(np.diag(b))
    return float(np.linalg.norm(off))


def union_graph(family: GraphFamily, modes) -> WeightedGraph:
    """Edge union over a subset of modes, with weights summed."""
    modes = list(modes)
    if not modes:
        raise ValueError("mode subset must not be empty")
    w = np.zeros((family.n, family.n))
    for m in modes:
        if m not in family.graphs:
            raise KeyError(f"mode {m} not in family")
        w = w + family[m].weights
    return WeightedGraph(w)


def union_laplacian(family: GraphFamily, modes) -> np.ndarray:
    return laplacian(union_graph(family, modes))


def is_connected(g: WeightedGraph) -> bool:
    """Connectivity of the positive-weight edge set, via union-find."""
    n = g.n
    if n == 1:
        return True
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    rows, cols = np.nonzero(g.weights)
    for i, j in zip(rows, cols):
        if i < j:
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[ri] = rj
    root = find(0)
    return all(find(i) == root for i in range(1, n))


def min_positive_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue above the zero threshold of a symmetric matrix.

    Eigenvalues below ``1e-9 * max(1, spectral norm)`` count as zero. Raises
    if the matrix is asymmetric beyond tolerance or has no positive
    eigenvalue.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.T).max(initial=0.0) > _SYM_TOL * scale:
        raise ValueError("matrix is asymmetric beyond tolerance")
    eigs = np.linalg.eigvalsh(m)
    tol = _SYM_TOL * max(1.0, float(np.abs(eigs).max(initial=0.0)))
    positive = eigs[eigs > tol]
    if positive.size == 0:
        raise ValueError("matrix has no positive eigenvalue")
    return float(positive.min())


def connected_subsets(family: GraphFamily):
    """Yield every nonempty mode subset whose union graph is connected."""
    modes = family.modes
    if len(modes) > 16:
        raise ValueError(f"refusing to enumerate subsets of {len(modes)} modes (limit 16)")
    for r in range(1, len(modes) + 1):
        for combo in itertools.combinations(modes, r):
            if is_connected(union_graph(family, combo)):
                yield combo
