"""Shifted Chebyshev approximation of f(L) M for heat and phi targets.

The target is approximated as a scalar function of x on [0, lambda_max]; for
s < 1 the map x -> x**s is folded into the target, so L**s is never formed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _backend
from .spectral import check_order, frac_power, heat_filter, phi_filter

TARGETS = ("heat", "phi", "power")
MIN_NODES = 64


def default_degree(s: float) -> int:
    return 30 if float(s) == 1.0 else 80


def target_function(target: str, s: float, t: float):
    if target == "heat":
        return lambda x: heat_filter(x, s, t)
    if target == "phi":
        return lambda x: phi_filter(x, s, t)
    if target == "power":
        return lambda x: frac_power(x, s)
    raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")


@dataclass(frozen=True)
class ChebSeries:
    coefficients: np.ndarray
    lambda_max: float
    target: str
    s: float
    t: float

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def error_proxy(self) -> float:
        return float(abs(self.coefficients[-1]))

    def f0(self) -> float:
        return {"heat": 1.0, "phi": float(self.t), "power": 0.0}[self.target]

    def __call__(self, x):
        return cheb_eval(self, x)


def cheb_coefficients(target: str, lambda_max: float, m: int, s: float = 1.0, t: float = 1.0) -> ChebSeries:
    """Coefficients c_0..c_m of ``f(lambda_max (x + 1) / 2)`` by Gauss-Chebyshev quadrature.

    ``N = max(2m + 2, 64)`` nodes keep aliasing below the truncation error.
    The series is ``c_0 + sum_{k>=1} c_k T_k`` with c_0 already halved.
    """
    s = check_order(s)
    if not lambda_max > 0:
        raise ValueError(f"lambda_max must be positive, got {lambda_max}")
    if m < 1:
        raise ValueError(f"degree must be >= 1, got {m}")
    f = target_function(target, s, t)
    N = max(2 * m + 2, MIN_NODES)
    theta = np.pi * (np.arange(N) + 0.5) / N
    fx = f(0.5 * lambda_max * (np.cos(theta) + 1.0))
    k = np.arange(m + 1)
    c = (2.0 / N) * (np.cos(np.outer(k, theta)) @ fx)
    c[0] *= 0.5
    c.setflags(write=False)
    return ChebSeries(c, float(lambda_max), target, s, float(t))


def cheb_eval(series: ChebSeries, x) -> np.ndarray:
    """Clenshaw evaluation of the series at points ``x`` in [0, lambda_max]."""
    y = 2.0 * np.asarray(x, dtype=float) / series.lambda_max - 1.0
    c = series.coefficients
    b1 = np.zeros_like(y)
    b2 = np.zeros_like(y)
    for ck in c[:0:-1]:
        b1, b2 = 2.0 * y * b1 - b2 + ck, b1
    return y * b1 - b2 + c[0]


def cheb_error_estimate(series: ChebSeries) -> float:
    c = series.coefficients
    if c.shape[0] < 2:
        return float(abs(c[-1]))
    return float(max(abs(c[-2]), abs(c[-1])))


def auto_degree(target: str, lambda_max: float, s: float, t: float, tol: float,
                m_min: int = 4, m_max: int = 400) -> int:
    """Smallest degree (step 2) whose error estimate is at most ``tol``; ``m_max`` if none."""
    for m in range(m_min, m_max + 1, 2):
        if cheb_error_estimate(cheb_coefficients(target, lambda_max, m, s, t)) <= tol:
            return m
    return m_max


class ProductCounter:
    """Counts sparse matrix-block products issued by :func:`cheb_apply`."""

    def __init__(self):
        self.count = 0

    def __repr__(self):
        return f"ProductCounter({self.count})"


def cheb_apply(L, series: ChebSeries, M, counter: ProductCounter | None = None,
               projector=None, backend: str | None = None) -> np.ndarray:
    """``sum_k c_k T_k*(L) M`` by the shifted three-term recurrence.

    Exactly ``m`` sparse products are issued. The caller must supply
    ``series.lambda_max >= lambda_max(L)``; an underestimate is not detected.

    With ``projector`` the kernel component is handled exactly,
    ``f(0) Pi M + p(L) (I - Pi) M``, which removes the polynomial error at
    ``x = 0`` where ``x**s`` is not smooth.
    """
    L = sp.csr_matrix(L)
    M = np.asarray(M, dtype=float)
    if M.shape[0] != L.shape[0]:
        raise ValueError(f"operand has {M.shape[0]} rows, operator is {L.shape[0]}x{L.shape[0]}")
    impl = _backend.get(backend)
    if projector is not None:
        K = projector.apply(M)
        body, nprod = impl.cheb_series(L.indptr, L.indices, L.data, M - K,
                                       series.coefficients, 2.0 / series.lambda_max)
        out = body + series.f0() * K
    else:
        out, nprod = impl.cheb_series(L.indptr, L.indices, L.data, M,
                                      series.coefficients, 2.0 / series.lambda_max)
    if counter is not None:
        counter.count += nprod
    return out
