"""Semantic graph refinement from external embeddings and attention weights, then re-diffusion."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from . import spectral
from .graph import Graph, GraphError, LaplacianKind, from_adjacency, hop_distances, is_connected, laplacian
from .operators import build_operator
from .selftrain import self_train
from .solver import build_source, one_hot, predict, solve_closed_form

SIGMA_PAIRS = 1000


def check_embeddings(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2:
        raise ValueError(f"embeddings must be an n-by-d matrix, got shape {Z.shape}")
    zero = np.flatnonzero(~np.any(Z != 0, axis=1))
    if zero.size:
        raise ValueError(f"{zero.size} all-zero embedding row(s), first {zero[:5].tolist()}")
    if not np.all(np.isfinite(Z)):
        raise ValueError("embeddings contain non-finite values")
    return Z


def read_embeddings(path) -> np.ndarray:
    Z = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return check_embeddings(Z)


def read_attention(path, n: int) -> sp.csr_matrix:
    """Edge-list of attention weights; both directions of a pair are averaged."""
    sums, counts = {}, {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphError(f"{path}:{lineno}: expected 'i j weight'")
            try:
                i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: {exc}") from None
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"{path}:{lineno}: node index out of range for n={n}")
            if not 0.0 <= w <= 1.0:
                raise GraphError(f"{path}:{lineno}: attention weight {w} outside [0, 1]")
            key = (min(i, j), max(i, j))
            sums[key] = sums.get(key, 0.0) + w
            counts[key] = counts.get(key, 0) + 1
    return attention_matrix({k: sums[k] / counts[k] for k in sums}, n)


def attention_matrix(pairs: dict, n: int) -> sp.csr_matrix:
    if not pairs:
        return sp.csr_matrix((n, n))
    ij = np.array(list(pairs.keys()), dtype=int)
    w = np.array(list(pairs.values()), dtype=float)
    A = sp.coo_matrix((w, (ij[:, 0], ij[:, 1])), shape=(n, n)).tocsr()
    off = sp.triu(A, k=1)
    return sp.csr_matrix(off + off.T + sp.diags(A.diagonal()))


def cosine_similarity(Z) -> np.ndarray:
    Z = check_embeddings(Z)
    Zn = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    S = Zn @ Zn.T
    S = 0.5 * (S + S.T)
    np.clip(S, -1.0, 1.0, out=S)
    np.fill_diagonal(S, 1.0)
    return S


def pairwise_sq_distances(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    sq = np.einsum("ij,ij->i", Z, Z)
    D = sq[:, None] + sq[None, :] - 2.0 * Z @ Z.T
    D = 0.5 * (D + D.T)
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D


def median_pair_distance(Z, n_pairs: int = SIGMA_PAIRS, seed: int = 0) -> float:
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0]
    if n < 2:
        raise ValueError("need at least two embeddings")
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, n_pairs)
    j = rng.integers(0, n - 1, n_pairs)
    j = j + (j >= i)  # distinct pairs
    return float(np.median(np.linalg.norm(Z[i] - Z[j], axis=1)))


def mean_nn_distance(Z) -> float:
    """Mean distance from each embedding to its nearest other embedding."""
    d, _ = cKDTree(np.asarray(Z, dtype=float)).query(Z, k=2)
    return float(d[:, 1].mean())


def gaussian_embedding_similarity(Z, sigma="auto", seed: int = 0) -> tuple[np.ndarray, float]:
    """``exp(-||z_i - z_j||^2 / (2 sigma^2))``.

    ``sigma="auto"`` uses the sampled median pair distance, ``sigma="nn"`` the
    mean nearest-neighbour distance (a local scale, useful when the embedding
    is the geometry the graph was built from).
    """
    Z = np.asarray(Z, dtype=float)
    if sigma in ("auto", "nn"):
        sigma = median_pair_distance(Z, seed=seed) if sigma == "auto" else mean_nn_distance(Z)
        if sigma == 0:
            sigma = 1.0
    sigma = float(sigma)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    S = np.exp(-pairwise_sq_distances(Z) / (2.0 * sigma * sigma))
    np.fill_diagonal(S, 1.0)
    return S, sigma


def structural_similarity(g: Graph) -> np.ndarray:
    """``exp(-hop distance)``; unreachable pairs get 0."""
    return np.exp(-hop_distances(g))


def combine_similarities(weights, S_cos, S_heat, S_struct) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (3,) or np.any(w < 0):
        raise ValueError("need three non-negative weights")
    return w[0] * np.asarray(S_cos) + w[1] * np.asarray(S_heat) + w[2] * np.asarray(S_struct)


def combine_gat(alphas, S_embed, attention, W) -> np.ndarray:
    """``a1 S_embed + a2 attention + a3 W`` with ``a1 + a2 + a3 = 1``."""
    a = np.asarray(alphas, dtype=float)
    if a.shape != (3,) or np.any(a < 0):
        raise ValueError("need three non-negative weights")
    if abs(a.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {a.sum():.12g}")
    out = a[0] * np.asarray(S_embed, dtype=float)
    if attention is not None:
        out = out + a[1] * (attention.toarray() if sp.issparse(attention) else np.asarray(attention))
    out = out + a[2] * (W.toarray() if sp.issparse(W) else np.asarray(W))
    return out


def threshold_sparsify(M, epsilon: float, keep_edges=()) -> sp.csr_matrix:
    """Keep entries ``> epsilon`` and every pair in ``keep_edges`` (both directions)."""
    M = np.asarray(M, dtype=float)
    mask = M > epsilon
    if len(keep_edges):
        ij = np.asarray(list(keep_edges), dtype=int).reshape(-1, 2)
        mask[ij[:, 0], ij[:, 1]] = True
        mask[ij[:, 1], ij[:, 0]] = True
    mask &= M != 0
    mask |= mask.T
    r, c = np.nonzero(mask)
    return sp.csr_matrix((M[r, c], (r, c)), shape=M.shape)


def _top_k(order_key, k, exclude=None):
    """Indices of the k largest keys, ties broken by lower index."""
    idx = np.arange(order_key.shape[0])
    if exclude is not None:
        keep = idx != exclude
        idx, order_key = idx[keep], order_key[keep]
    order = np.lexsort((idx, -order_key))
    return set(idx[order[:k]].tolist())


def anomaly_scores(g: Graph, Z, k: int) -> np.ndarray:
    """``|N_struct(i) symdiff N_embed(i)|``: graph neighbours (k heaviest) versus k nearest by cosine."""
    if k < 1:
        raise ValueError("k must be >= 1")
    S = cosine_similarity(Z)
    W = g.weights
    out = np.zeros(g.n, dtype=int)
    for i in range(g.n):
        lo, hi = W.indptr[i], W.indptr[i + 1]
        nbr, w = W.indices[lo:hi], W.data[lo:hi]
        order = np.lexsort((nbr, -w))
        ns = set(nbr[order[:k]].tolist())
        ne = _top_k(S[i], k, exclude=i)
        out[i] = len(ns ^ ne)
    return out


@dataclass(frozen=True)
class RefinedGraph:
    graph: Graph
    base: Graph
    tau: float
    combine: str
    weights: tuple
    sigma: float | None


def refine_graph(g: Graph, Z, attention=None, weights=(0.4, 0.3, 0.3), tau: float = 0.0,
                 combine: str = "gat", s: float = 1.0, t: float = 1.0,
                 kind="sym", sigma="auto", seed: int = 0) -> RefinedGraph:
    """Combined similarity, thresholded at ``tau``; original edges are always kept.

    ``combine="gat"``: ``a1 S_gauss + a2 attention + a3 W``.
    ``combine="similarity"``: ``w1 S_cos + w2 H_t + w3 exp(-d_G)`` with ``H_t``
    the fractional heat kernel of ``g``.
    """
    Z = check_embeddings(Z)
    if Z.shape[0] != g.n:
        raise ValueError(f"{Z.shape[0]} embedding rows for a graph of {g.n} nodes")
    used_sigma = None
    if combine == "gat":
        S_embed, used_sigma = gaussian_embedding_similarity(Z, sigma, seed)
        M = combine_gat(weights, S_embed, attention, g.weights)
    elif combine == "similarity":
        spec = spectral.eigendecompose(laplacian(g, kind))
        H = spectral.heat_kernel_matrix(spec, s, t)
        M = combine_similarities(weights, cosine_similarity(Z), H, structural_similarity(g))
    else:
        raise ValueError(f"unknown combiner {combine!r}; expected 'gat' or 'similarity'")
    M = 0.5 * (M + M.T)
    A = threshold_sparsify(M, tau, g.edge_set())
    A = A.tolil()
    A.setdiag(0.0)
    A = A.tocsr()
    A.eliminate_zeros()
    if A.nnz and A.data.min() <= 0:
        warnings.warn("dropping non-positive combined weights on kept edges", stacklevel=2)
        A.data[A.data <= 0] = 0.0
        A.eliminate_zeros()
    return RefinedGraph(from_adjacency(A), g, float(tau), combine, tuple(float(w) for w in weights), used_sigma)


def refine_and_diffuse(g: Graph, Z, labels, labeled, attention=None, weights=(0.4, 0.3, 0.3),
                       tau: float = 0.0, s: float = 1.0, t: float = 1.0, kind="sym",
                       combine: str = "gat", variant: str = "degree_scaled", selftrain_iters: int = 5,
                       theta: float = 0.4, dt: float = 1.0, strategy: str = "spectral", sigma="auto",
                       seed: int = 0):
    """Refine the graph, diffuse with source on it, then run self-training.

    Returns ``(predictions, scores, info)``.
    """
    labels = np.asarray(labels)
    c = int(labels.max()) + 1
    rg = refine_graph(g, Z, attention, weights, tau, combine, s, t, kind, sigma=sigma, seed=seed)
    G = rg.graph
    connected = is_connected(G)
    if not connected:
        warnings.warn("refined graph is disconnected; steady-state checks skipped", stacklevel=2)
    kind = LaplacianKind.parse(kind)
    op = build_operator(G, kind, s, strategy=strategy)
    U0 = one_hot(labels, labeled, c)
    F = build_source(U0, labeled, variant, G.degrees)
    U = solve_closed_form(op, U0, F, t)
    n_lab = len(labeled)
    history = []
    if selftrain_iters > 0:
        res = self_train(op, U, F, labeled, dt, theta, selftrain_iters)
        U, history, n_lab = res.U, res.history, len(res.labeled)
    info = {"n_edges": G.n_edges, "connected": connected, "sigma": rg.sigma, "history": history,
            "n_labeled_final": n_lab}
    return predict(U), U, info
