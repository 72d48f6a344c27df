"""Weighted undirected graphs, Laplacians and the kernel projector."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph


class GraphError(ValueError):
    """Invalid graph input or an operation the graph does not support."""


class LaplacianKind(str, enum.Enum):
    COMBINATORIAL = "combinatorial"
    SYM_NORMALIZED = "sym"
    SYM_NORMALIZED_SELF_LOOPS = "sym-selfloops"
    RANDOM_WALK = "random-walk"

    @property
    def symmetric(self) -> bool:
        return self is not LaplacianKind.RANDOM_WALK

    @classmethod
    def parse(cls, value: "str | LaplacianKind") -> "LaplacianKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "comb": cls.COMBINATORIAL,
            "combinatorial": cls.COMBINATORIAL,
            "sym": cls.SYM_NORMALIZED,
            "normalized": cls.SYM_NORMALIZED,
            "sym-selfloops": cls.SYM_NORMALIZED_SELF_LOOPS,
            "selfloops": cls.SYM_NORMALIZED_SELF_LOOPS,
            "rw": cls.RANDOM_WALK,
            "random-walk": cls.RANDOM_WALK,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise GraphError(
                f"unknown Laplacian kind {value!r}; expected one of {sorted(set(aliases))}"
            ) from None


@dataclass(frozen=True)
class Graph:
    """Symmetric sparse weight matrix with cached degrees.

    Both directions of every edge are stored, so ``weights @ x`` is the
    adjacency product without a transpose.
    """

    weights: sp.csr_matrix
    degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        W = sp.csr_matrix(self.weights, dtype=np.float64)
        W.sum_duplicates()
        W.eliminate_zeros()
        W.sort_indices()
        if W.shape[0] != W.shape[1]:
            raise GraphError(f"weight matrix must be square, got {W.shape}")
        if W.nnz and W.data.min() < 0:
            raise GraphError("edge weights must be non-negative")
        if W.nnz:
            asym = abs(W - W.T).max()
            if asym > 1e-12 * W.data.max():
                raise GraphError(f"weight matrix is not symmetric (max |W - W^T| = {asym:.3g})")
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "degrees", np.asarray(W.sum(axis=1)).ravel())

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def n_edges(self) -> int:
        """Undirected edge count (self-loops counted once)."""
        W = self.weights
        n_loops = int(np.count_nonzero(W.diagonal()))
        return (W.nnz - n_loops) // 2 + n_loops

    @property
    def volume(self) -> float:
        return float(self.degrees.sum())

    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected edges as (i, j, w) with i < j."""
        U = sp.triu(self.weights, k=1).tocoo()
        return [(int(i), int(j), float(w)) for i, j, w in zip(U.row, U.col, U.data)]

    def edge_set(self) -> set[tuple[int, int]]:
        U = sp.triu(self.weights, k=1).tocoo()
        return set(zip(U.row.tolist(), U.col.tolist()))


def build_graph(edges, n: int) -> Graph:
    """Build a graph from ``(i, j, w)`` triples.

    Duplicate pairs are summed and ``(i, j)`` implies ``(j, i)``; ``(0, 1, 2.0)``
    and ``(1, 0, 1.0)`` therefore give ``W[0, 1] == 3.0``.
    """
    if n < 0:
        raise GraphError("node count must be non-negative")
    edges = list(edges)
    if not edges:
        return Graph(sp.csr_matrix((n, n)))
    rows, cols, vals = [], [], []
    for k, e in enumerate(edges):
        if len(e) == 2:
            i, j = e
            w = 1.0
        else:
            i, j, w = e
        i, j, w = int(i), int(j), float(w)
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge {k}: node index out of range for n={n}: ({i}, {j})")
        if i == j:
            raise GraphError(f"edge {k}: self-loop ({i}, {i}) is not allowed")
        if not w > 0:
            raise GraphError(f"edge {k}: weight must be positive, got {w}")
        rows.append(i)
        cols.append(j)
        vals.append(w)
    W = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return Graph(W + W.T)


def from_adjacency(W) -> Graph:
    """Wrap an existing symmetric weight matrix (dense or sparse)."""
    W = sp.csr_matrix(W, dtype=np.float64)
    if W.nnz and np.any(W.diagonal() != 0):
        raise GraphError("self-loops are not allowed in the weight matrix")
    return Graph(W)


def read_edgelist(path, n: int | None = None) -> Graph:
    """Read ``i j [w]`` lines; ``#`` starts a comment line, ids are 0-based."""
    edges = []
    max_id = -1
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if len(parts) == 2:
                    i, j, w = int(parts[0]), int(parts[1]), 1.0
                elif len(parts) == 3:
                    i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
                else:
                    raise ValueError(f"expected 2 or 3 fields, got {len(parts)}")
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: {exc}") from None
            edges.append((i, j, w))
            max_id = max(max_id, i, j)
    if n is None:
        n = max_id + 1
    return build_graph(edges, n)


def write_edgelist(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n}\n")
        for i, j, w in g.edges():
            fh.write(f"{i} {j} {w!r}\n")


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return True
    n_comp = csgraph.connected_components(g.weights, directed=False, return_labels=False)
    return n_comp == 1


def laplacian(g: Graph, kind: "LaplacianKind | str") -> sp.csr_matrix:
    kind = LaplacianKind.parse(kind)
    W = g.weights
    n = g.n
    I = sp.identity(n, format="csr")
    if kind is LaplacianKind.COMBINATORIAL:
        L = sp.diags(g.degrees) - W
    elif kind is LaplacianKind.SYM_NORMALIZED_SELF_LOOPS:
        A = W + I
        d = np.asarray(A.sum(axis=1)).ravel()
        s = sp.diags(1.0 / np.sqrt(d))
        L = I - s @ A @ s
    else:
        d = g.degrees
        isolated = np.flatnonzero(d <= 0)
        if isolated.size:
            raise GraphError(
                f"{kind.value} Laplacian needs positive degrees; "
                f"{isolated.size} isolated node(s), first {isolated[:5].tolist()}"
            )
        if kind is LaplacianKind.SYM_NORMALIZED:
            s = sp.diags(1.0 / np.sqrt(d))
            L = I - s @ W @ s
        else:
            L = I - sp.diags(1.0 / d) @ W
    L = sp.csr_matrix(L)
    L.sort_indices()
    return L


def kernel_vector(g: Graph, kind: "LaplacianKind | str") -> np.ndarray:
    """Unit vector spanning the Laplacian kernel of a connected graph."""
    kind = LaplacianKind.parse(kind)
    if kind is LaplacianKind.SYM_NORMALIZED:
        v = np.sqrt(g.degrees)
    elif kind is LaplacianKind.SYM_NORMALIZED_SELF_LOOPS:
        v = np.sqrt(g.degrees + 1.0)
    else:
        v = np.ones(g.n)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Projector:
    """Orthogonal rank-one projector ``u -> v (v^T u)`` onto the Laplacian kernel."""

    kind: LaplacianKind
    vector: np.ndarray

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = self.vector
        if u.ndim == 1:
            return v * (v @ u)
        return np.outer(v, v @ u)

    __call__ = apply

    def complement(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u, dtype=float) - self.apply(u)

    def matrix(self) -> np.ndarray:
        return np.outer(self.vector, self.vector)


def projector(g: Graph, kind: "LaplacianKind | str") -> Projector:
    """Projector onto ker(L). The graph must be connected so the kernel is one-dimensional.

    For the random-walk Laplacian the kernel is still span{1}; the projector
    is the orthogonal one, ``(1/n) 1 1^T``.
    """
    kind = LaplacianKind.parse(kind)
    if not is_connected(g):
        raise GraphError("graph is disconnected: the Laplacian kernel is not one-dimensional")
    return Projector(kind, kernel_vector(g, kind))


def gershgorin_bound(L) -> float:
    L = sp.csr_matrix(L)
    diag = L.diagonal()
    absrow = np.asarray(abs(L).sum(axis=1)).ravel()
    radius = absrow - np.abs(diag)
    return float(np.max(diag + radius)) if L.shape[0] else 0.0


def lambda_max(L, tol: float = 1e-8, max_iter: int = 50000, seed: int = 0) -> tuple[float, bool]:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Returns ``(estimate, converged)``. When the Rayleigh quotient has not
    settled after ``max_iter`` products the Gershgorin disc bound is returned
    with ``converged=False``; that value is a guaranteed upper bound.
    """
    L = sp.csr_matrix(L)
    n = L.shape[0]
    if n == 0:
        return 0.0, True
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    rho = 0.0
    for _ in range(max_iter):
        y = L @ x
        rho_new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, True
        # some eigenvalue lies within ||Lx - rho x|| of rho
        resid = np.linalg.norm(y - rho_new * x)
        x = y / ny
        if resid <= tol * rho_new:
            return rho_new, True
        rho = rho_new
    return gershgorin_bound(L), False


LAMBDA_SAFETY = 1.01


def spectral_upper_bound(L, tol: float = 1e-8, seed: int = 0) -> float:
    """λ_max estimate inflated by ``LAMBDA_SAFETY``, never above the Gershgorin bound."""
    est, converged = lambda_max(L, tol=tol, seed=seed)
    if not converged:
        return est
    return min(est * LAMBDA_SAFETY, gershgorin_bound(L) * LAMBDA_SAFETY)


def hop_distances(g: Graph) -> np.ndarray:
    """All-pairs unweighted shortest-path lengths; ``inf`` when unreachable."""
    A = g.weights.copy()
    A.data[:] = 1.0
    return csgraph.shortest_path(A, method="D", directed=False, unweighted=True)
