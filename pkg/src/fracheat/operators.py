"""Strategies applying functions of L**s: exact spectral, truncated, Chebyshev, subordination.

Every strategy offers ``heat(M, t)`` for ``exp(-t L^s) M`` and ``phi(F, t)``
for ``t h(t L^s) F``; the steppers additionally use ``power`` (``L^s M``) and
``resolvent`` (``(I + dt L^s)^{-1} M``).
"""
from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from . import chebyshev as cheb
from . import spectral
from .graph import GraphError, is_connected, laplacian, projector, spectral_upper_bound

STRATEGIES = ("spectral", "truncated", "chebyshev", "subordination")


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-convergence, instability)."""


class KernelOperator:
    name = "base"

    def __init__(self, L, s: float, proj=None):
        self.L = sp.csr_matrix(L)
        self.s = spectral.check_order(s)
        self.projector = proj
        self.n = self.L.shape[0]

    def heat(self, M, t):
        raise NotImplementedError

    def phi(self, F, t):
        raise NotImplementedError

    def power(self, M):
        raise NotImplementedError

    def resolvent(self, M, dt, tol=1e-10, maxiter=None):
        """``(I + dt L^s)^{-1} M`` by conjugate gradients, column by column."""
        M = np.asarray(M, dtype=float)
        op = LinearOperator((self.n, self.n), matvec=lambda x: x + dt * self.power(x), dtype=float)
        cols = M[:, None] if M.ndim == 1 else M
        out = np.empty_like(cols)
        for j in range(cols.shape[1]):
            b = cols[:, j]
            x, info = cg(op, b, x0=b.copy(), rtol=tol, atol=0.0, maxiter=maxiter or 10 * self.n)
            if info != 0:
                res = np.linalg.norm(op.matvec(x) - b) / max(np.linalg.norm(b), 1e-300)
                raise NumericalError(
                    f"CG did not converge for column {j}: {info} iterations, relative residual {res:.3g}"
                )
            out[:, j] = x
        return out[:, 0] if M.ndim == 1 else out

    def lambda_max(self) -> float:
        return spectral_upper_bound(self.L)


class SpectralExact(KernelOperator):
    name = "spectral"

    def __init__(self, L, s, spec=None, proj=None):
        super().__init__(L, s, proj)
        self.spec = spec if spec is not None else spectral.eigendecompose(self.L)

    def heat(self, M, t):
        return spectral.apply_heat(self.spec, self.s, t, M)

    def phi(self, F, t):
        return spectral.apply_phi(self.spec, self.s, t, F)

    def power(self, M):
        return spectral.apply_power(self.spec, self.s, M)

    def resolvent(self, M, dt, tol=1e-10, maxiter=None):
        return spectral.apply_resolvent(self.spec, self.s, dt, M)

    def lambda_max(self):
        return float(self.spec.eigenvalues[-1])


class TruncatedSpectral(SpectralExact):
    """Heat and phi filters restricted to the ``m`` lowest modes."""

    name = "truncated"

    def __init__(self, L, s, m, spec=None, proj=None):
        super().__init__(L, s, spec, proj)
        if not 1 <= m <= self.spec.n:
            raise spectral.SpectralError(f"mode count must satisfy 1 <= m <= n={self.spec.n}, got {m}")
        self.m = int(m)

    def _mask(self, g):
        g = g.copy()
        g[self.m:] = 0.0
        return g

    def heat(self, M, t):
        return self.spec.filter(self._mask(spectral.heat_filter(self.spec.eigenvalues, self.s, t)), M)

    def phi(self, F, t):
        return self.spec.filter(self._mask(spectral.phi_filter(self.spec.eigenvalues, self.s, t)), F)


class Chebyshev(KernelOperator):
    """Matrix-free polynomial filters; series are cached per (target, t)."""

    name = "chebyshev"

    def __init__(self, L, s, m=None, lambda_max=None, proj=None, deflate=True, backend=None):
        super().__init__(L, s, proj)
        self.m = int(m) if m is not None else cheb.default_degree(self.s)
        self.lmax = float(lambda_max) if lambda_max is not None else spectral_upper_bound(self.L)
        self.deflate = deflate and proj is not None
        self.backend = backend
        self.counter = cheb.ProductCounter()
        self._cache = {}

    def series(self, target, t):
        key = (target, float(t))
        if key not in self._cache:
            self._cache[key] = cheb.cheb_coefficients(target, self.lmax, self.m, self.s, t)
        return self._cache[key]

    def _apply(self, target, M, t):
        return cheb.cheb_apply(self.L, self.series(target, t), M, counter=self.counter,
                               projector=self.projector if self.deflate else None,
                               backend=self.backend)

    def heat(self, M, t):
        if t < 0:
            raise spectral.SpectralError("diffusion time must be non-negative")
        if t == 0:
            return np.array(M, dtype=float, copy=True)
        return self._apply("heat", M, t)

    def phi(self, F, t):
        if t == 0:
            return np.zeros_like(np.asarray(F, dtype=float))
        return self._apply("phi", F, t)

    def power(self, M):
        M = np.asarray(M, dtype=float)
        if self.s == 1.0:
            self.counter.count += 1
            return self.L @ M
        return self._apply("power", M, 0.0)

    def lambda_max(self):
        return self.lmax


class Subordination(SpectralExact):
    """``exp(-t sqrt(L))`` from heat-semigroup evaluations (order s = 1/2 only).

    ``phi`` integrates the subordinated semigroup in time with Gauss-Legendre,
    ``t h(t L^s) F = int_0^t exp(-r L^s) F dr``.
    """

    name = "subordination"

    def __init__(self, L, s=0.5, quad=spectral.SUBORDINATION_NODES, spec=None, proj=None, time_nodes=32):
        if float(s) != 0.5:
            raise spectral.SpectralError("subordination is implemented for s = 1/2 only")
        super().__init__(L, s, spec, proj)
        self.quad = int(quad)
        self.time_nodes = int(time_nodes)
        self._mv = spectral.spectral_heat_matvec(self.spec)

    def heat(self, M, t):
        return spectral.subordination_apply(self._mv, t, M, self.quad)

    def phi(self, F, t):
        F = np.asarray(F, dtype=float)
        if t == 0:
            return np.zeros_like(F)
        x, w = np.polynomial.legendre.leggauss(self.time_nodes)
        r = 0.5 * t * (x + 1.0)
        out = np.zeros_like(F)
        for rk, wk in zip(r, 0.5 * t * w):
            out += wk * self.heat(F, rk)
        return out


def build_operator(g, kind, s, strategy="spectral", m=None, lambda_max=None, deflate=True,
                   quad=spectral.SUBORDINATION_NODES, backend=None, spec=None):
    """Laplacian of ``g`` wrapped in the requested strategy.

    The kernel projector is attached when the graph is connected and the
    Laplacian symmetric; otherwise Chebyshev runs without deflation.
    """
    L = laplacian(g, kind)
    proj = None
    if is_connected(g):
        try:
            proj = projector(g, kind)
        except GraphError:
            proj = None
    strategy = strategy.lower()
    if strategy == "spectral":
        return SpectralExact(L, s, spec=spec, proj=proj)
    if strategy == "truncated":
        return TruncatedSpectral(L, s, m if m is not None else g.n, spec=spec, proj=proj)
    if strategy == "chebyshev":
        if proj is None and deflate:
            warnings.warn("graph is disconnected; Chebyshev runs without kernel deflation", stacklevel=2)
        if not L.shape[0] or not np.allclose((L - L.T).data, 0, atol=1e-12):
            proj = None
        return Chebyshev(L, s, m=m, lambda_max=lambda_max, proj=proj, deflate=deflate, backend=backend)
    if strategy == "subordination":
        return Subordination(L, s, quad=quad, spec=spec, proj=proj)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
