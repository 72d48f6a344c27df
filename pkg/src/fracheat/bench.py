"""Timing of the Chebyshev recurrence on each available kernel backend."""
from __future__ import annotations

import time

import numpy as np

from . import _backend
from .chebyshev import cheb_coefficients
from .harness.datasets import TwoMoonConfig, two_moon
from .graph import laplacian, spectral_upper_bound


def bench_cheb(n: int = 5000, degree: int = 30, cols: int = 2, repeat: int = 5, seed: int = 0) -> dict:
    """Best-of-``repeat`` wall time per backend on a Two-Moon kNN graph with ``n`` nodes.

    Also reports the largest absolute difference between backends.
    """
    _, _, g = two_moon(TwoMoonConfig(n=n, seed=seed))
    L = laplacian(g, "sym")
    series = cheb_coefficients("heat", spectral_upper_bound(L), degree, 1.0, 1.0)
    M = np.random.default_rng(seed).standard_normal((n, cols))
    out = {"n": n, "nnz": int(L.nnz), "degree": degree, "cols": cols, "repeat": repeat, "backends": {}}
    ref = None
    for name in _backend.available():
        impl = _backend.get(name)
        best = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            res, _ = impl.cheb_series(L.indptr, L.indices, L.data, M, series.coefficients, 2.0 / series.lambda_max)
            best = min(best, time.perf_counter() - t0)
        out["backends"][name] = best
        if ref is None:
            ref = res
        else:
            out["max_abs_diff"] = float(np.abs(res - ref).max())
    b = out["backends"]
    if "compiled" in b and "python" in b:
        out["speedup"] = b["python"] / b["compiled"]
    return out
