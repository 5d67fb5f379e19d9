"""Random graphs, Laplacian-rule interaction matrices and observed subsets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, FormatError, ParameterError
from .matrix_io import read_matrix
from .rng import make_rng

BINARIZE_TOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Binary adjacency without self-loops.

    ``adj[i, j] = 1`` encodes an arrow j -> i, so row i lists the parents of i.
    """

    adj: np.ndarray
    directed: bool

    def __post_init__(self):
        adj = np.asarray(self.adj)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ParameterError(f"adjacency must be square, got {adj.shape}")
        if np.any(np.diag(adj) != 0):
            raise ParameterError("adjacency has self-loops")
        if not self.directed and not np.array_equal(adj, adj.T):
            raise ParameterError("undirected graph with asymmetric adjacency")

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def in_degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    def n_edges(self) -> int:
        m = int(self.adj.sum())
        return m if self.directed else m // 2


@dataclass(frozen=True)
class InteractionMatrix:
    A: np.ndarray
    rho: float
    alpha: float
    graph: Graph

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def a_plus_min(self) -> float:
        return smallest_offdiag_positive(self.A)


@dataclass(frozen=True)
class ObservedSet:
    indices: np.ndarray
    n_total: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        if idx.size == 0:
            raise ParameterError("observed set is empty")
        if idx.size > self.n_total:
            raise ParameterError("more observed nodes than nodes")
        if idx.min() < 0 or idx.max() >= self.n_total:
            raise ParameterError(f"observed index out of range [0, {self.n_total})")
        if np.any(np.diff(idx) <= 0):
            raise ParameterError("observed indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.indices.size

    @property
    def latent(self) -> np.ndarray:
        mask = np.ones(self.n_total, dtype=bool)
        mask[self.indices] = False
        return np.flatnonzero(mask)

    @classmethod
    def full(cls, n: int) -> "ObservedSet":
        return cls(np.arange(n), n)


def smallest_offdiag_positive(A) -> float:
    """Smallest strictly positive off-diagonal entry; ``nan`` if there is none."""
    A = np.asarray(A)
    off = A[~np.eye(A.shape[0], dtype=bool)]
    pos = off[off > 0]
    return float(pos.min()) if pos.size else float("nan")


def erdos_renyi(n: int, p: float, directed: bool = False, seed: int = 0) -> Graph:
    """Erdos-Renyi (undirected) or binomial (directed) random graph.

    Candidate pairs are visited in row-major order, one uniform draw each:
    all ordered pairs i != j when directed, the pairs i < j otherwise.
    """
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    if directed:
        mask = ~np.eye(n, dtype=bool)
    else:
        mask = np.triu(np.ones((n, n), dtype=bool), k=1)
    u = rng.random(int(mask.sum()))
    adj = np.zeros((n, n), dtype=np.int8)
    adj[mask] = u < p
    if not directed:
        adj = adj + adj.T
    return Graph(adj, directed)


def laplacian_weights(G: Graph, alpha: float, rho: float) -> InteractionMatrix:
    """Laplacian rule: ``A_ij = alpha G_ij / d_max`` and ``A_ii = rho - sum_k A_ik``.

    ``d_max`` is the largest in-degree (row sum of ``G.adj``), so every row of
    ``A`` sums to ``rho`` and the diagonal stays ``>= rho - alpha >= 0``.
    """
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"rho must lie in (0, 1), got {rho}")
    if not 0.0 < alpha <= rho:
        raise ParameterError(f"need 0 < alpha <= rho, got alpha={alpha}, rho={rho}")
    d_max = int(G.in_degrees().max())
    if d_max < 1:
        raise DegenerateInputError("graph has no edges; Laplacian rule undefined")
    A = alpha * G.adj.astype(float) / d_max
    np.fill_diagonal(A, rho - A.sum(axis=1))
    return InteractionMatrix(A, float(rho), float(alpha), G)


def load_adjacency(path, directed=None) -> Graph:
    """Read an adjacency in the matrix text format.

    Entries with absolute value above ``BINARIZE_TOL`` become edges.  When
    ``directed`` is None it is inferred from the symmetry of the binarized
    matrix.
    """
    M = read_matrix(path)
    if M.shape[0] != M.shape[1]:
        raise FormatError(f"{path}: adjacency must be square, got {M.shape}")
    adj = (np.abs(M) > BINARIZE_TOL).astype(np.int8)
    if np.any(np.diag(adj)):
        raise FormatError(f"{path}: nonzero diagonal (self-loops)")
    symmetric = np.array_equal(adj, adj.T)
    if directed is None:
        directed = not symmetric
    elif not directed and not symmetric:
        raise FormatError(f"{path}: asymmetric matrix cannot be loaded as undirected")
    return Graph(adj, bool(directed))


def sample_observed(n_total: int, n_obs: int, seed: int = 0) -> ObservedSet:
    if not 1 <= n_obs <= n_total:
        raise ParameterError(f"need 1 <= n_obs <= n_total, got {n_obs} of {n_total}")
    rng = make_rng(seed)
    idx = np.sort(rng.choice(n_total, size=n_obs, replace=False))
    return ObservedSet(idx, n_total)


def spectral_radius(A, iters: int = 10_000, tol: float = 1e-14) -> float:
    """Power iteration on ``|A|``; exact for the nonnegative matrices used here."""
    A = np.abs(np.asarray(A, dtype=float))
    v = np.ones(A.shape[0]) / A.shape[0]
    lam = 0.0
    for _ in range(iters):
        w = A @ v
        nrm = np.abs(w).sum()
        if nrm == 0.0:
            return 0.0
        w /= nrm
        if np.abs(w - v).max() < tol:
            return float(nrm)
        v, lam = w, nrm
    return float(lam)
