"""Two-Moon generator with kNN graphs, and the Cora citation loader."""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from ..graph import Graph, GraphError, build_graph

BANDWIDTHS = ("mean", "offset", "local")

CORA_NODES = 2708
CORA_EDGES = 5278
CORA_CLASSES = 7


@dataclass(frozen=True)
class TwoMoonConfig:
    """Point cloud and kNN graph settings.

    Bandwidth rules (``scale`` multiplies sigma):
      mean    w = exp(-d^2 / 2 sigma^2), sigma = mean kNN distance
      offset  w = exp(-(d^2 - d_1^2) / 2 sigma^2), d_1 the nearest-neighbour distance of the row
      local   w = exp(-d^2 / (2 sigma_i sigma_j)), sigma_i the k-th neighbour distance
    """

    n: int = 1000
    noise: float = 0.15
    seed: int = 0
    k: int = 10
    bandwidth: str = "mean"
    scale: float = 1.0

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("two-moon needs n >= 4")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        if self.bandwidth not in BANDWIDTHS:
            raise ValueError(f"unknown bandwidth rule {self.bandwidth!r}; expected one of {BANDWIDTHS}")
        if not 1 <= self.k < self.n:
            raise ValueError("need 1 <= k < n")

    def to_dict(self):
        return asdict(self)


def moon_points(n: int, noise: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Upper unit half-circle and a lower one shifted by (1, -0.5), ``n // 2`` points each."""
    n0 = n // 2
    n1 = n - n0
    a = np.linspace(0.0, np.pi, n0)
    b = np.linspace(0.0, np.pi, n1)
    X = np.vstack([np.c_[np.cos(a), np.sin(a)], np.c_[1.0 - np.cos(b), 1.0 - np.sin(b) - 0.5]])
    if noise > 0:
        X = X + rng.normal(scale=noise, size=X.shape)
    y = np.r_[np.zeros(n0, dtype=int), np.ones(n1, dtype=int)]
    return X, y


def knn_graph(X, k: int = 10, bandwidth: str = "mean", scale: float = 1.0) -> Graph:
    """Symmetrised kNN graph, ``W = max(W_knn, W_knn^T)``, Gaussian weights."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    d, idx = cKDTree(X).query(X, k + 1)
    d, idx = d[:, 1:], idx[:, 1:]
    if bandwidth == "mean":
        sigma = scale * d.mean()
        w = np.exp(-(d**2) / (2.0 * sigma**2))
    elif bandwidth == "offset":
        sigma = scale * d.mean()
        w = np.exp(-(d**2 - d[:, :1] ** 2) / (2.0 * sigma**2))
    elif bandwidth == "local":
        sig = scale * d[:, -1]
        w = np.exp(-(d**2) / (2.0 * sig[:, None] * sig[idx]))
    else:
        raise ValueError(f"unknown bandwidth rule {bandwidth!r}")
    # far neighbours can underflow to 0 and would silently drop out of the sparse pattern
    w = np.maximum(w, np.finfo(float).tiny)
    W = sp.csr_matrix((w.ravel(), (np.repeat(np.arange(n), k), idx.ravel())), shape=(n, n))
    W = W.maximum(W.T)
    W.setdiag(0.0)
    W.eliminate_zeros()
    return Graph(W)


def two_moon(config: TwoMoonConfig | None = None, rng=None):
    """Returns ``(points, labels, graph)``; deterministic per ``config.seed`` unless ``rng`` is given."""
    config = config or TwoMoonConfig()
    rng = np.random.default_rng(config.seed) if rng is None else rng
    X, y = moon_points(config.n, config.noise, rng)
    return X, y, knn_graph(X, config.k, config.bandwidth, config.scale)


def read_labels(path) -> tuple[list[str], np.ndarray, list[str]]:
    """``node_id label`` lines (whitespace separated). Returns ids, integer labels and class names."""
    ids, names = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"{path}:{lineno}: expected 'node_id label'")
            ids.append(parts[0])
            names.append(parts[1])
    classes = sorted(set(names))
    lookup = {c: i for i, c in enumerate(classes)}
    return ids, np.array([lookup[c] for c in names], dtype=int), classes


def load_cora(edges_path, labels_path):
    """Citation graph on the nodes of ``labels_path``, in file order.

    ``edges_path`` holds ``cited citing`` pairs of node ids (the labels file's
    first column); direction is dropped and duplicates merged, so every edge
    has weight 1. Counts that differ from 2708 nodes, 5278 edges and 7
    classes only raise a warning.
    """
    ids, labels, classes = read_labels(labels_path)
    index = {pid: i for i, pid in enumerate(ids)}
    if len(index) != len(ids):
        raise GraphError(f"{labels_path}: duplicate node ids")
    pairs = set()
    with open(edges_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"{edges_path}:{lineno}: expected two node ids")
            try:
                i, j = index[parts[0]], index[parts[1]]
            except KeyError as exc:
                raise GraphError(f"{edges_path}:{lineno}: unknown node id {exc.args[0]}") from None
            if i != j:
                pairs.add((min(i, j), max(i, j)))
    g = build_graph(sorted(pairs), len(ids))
    found = (g.n, g.n_edges, len(classes))
    if found != (CORA_NODES, CORA_EDGES, CORA_CLASSES):
        warnings.warn(f"Cora counts (nodes, edges, classes) = {found}, expected "
                      f"{(CORA_NODES, CORA_EDGES, CORA_CLASSES)}", stacklevel=2)
    return g, labels
