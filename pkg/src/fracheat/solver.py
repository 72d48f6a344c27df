"""Sourced fractional diffusion dU/dt = -L^s U + F: closed form, time-steppers, prediction."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .operators import KernelOperator, NumericalError


class StabilityError(NumericalError):
    """Explicit step size outside the stability region."""


class StepperKind(str, enum.Enum):
    FORWARD_EULER = "forward-euler"
    BACKWARD_EULER = "backward-euler"
    EXPONENTIAL = "exponential"
    RK4 = "rk4"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"fe": cls.FORWARD_EULER, "euler": cls.FORWARD_EULER, "be": cls.BACKWARD_EULER,
                   "implicit": cls.BACKWARD_EULER, "exp": cls.EXPONENTIAL, "phi": cls.EXPONENTIAL}
        v = str(value).lower()
        if v in aliases:
            return aliases[v]
        try:
            return cls(v)
        except ValueError:
            raise ValueError(f"unknown stepper {value!r}; expected one of {[k.value for k in cls]}") from None

    @property
    def order(self) -> float:
        return {"forward-euler": 1.0, "backward-euler": 1.0, "exponential": np.inf, "rk4": 4.0}[self.value]


def one_hot(labels, labeled, c: int, n: int | None = None) -> np.ndarray:
    """Score matrix with one-hot rows on ``labeled`` and zero rows elsewhere."""
    labels = np.asarray(labels)
    n = labels.shape[0] if n is None else n
    idx = np.unique(np.asarray(labeled, dtype=int))
    U = np.zeros((n, c))
    U[idx, labels[idx]] = 1.0
    return U


def build_source(U0, labeled, variant: str = "plain", degrees=None) -> np.ndarray:
    """Mean-centred source: labeled rows ``U0_i - mean over labeled``, other rows zero.

    ``variant="degree_scaled"`` additionally divides row i by ``degrees[i]``.
    """
    U0 = np.asarray(U0, dtype=float)
    idx = np.unique(np.asarray(labeled, dtype=int))
    if idx.size == 0:
        raise ValueError("labeled set is empty")
    F = np.zeros_like(U0)
    F[idx] = U0[idx] - U0[idx].mean(axis=0)
    if variant == "plain":
        return F
    if variant in ("degree_scaled", "degree-scaled"):
        if degrees is None:
            raise ValueError("degree_scaled source needs node degrees")
        d = np.asarray(degrees, dtype=float)
        if np.any(d[idx] <= 0):
            raise ValueError("degree_scaled source needs positive degrees on labeled nodes")
        F[idx] /= d[idx, None]
        return F
    raise ValueError(f"unknown source variant {variant!r}")


@dataclass
class LabelState:
    U: np.ndarray
    labeled: tuple
    c: int
    F: np.ndarray

    @classmethod
    def from_labels(cls, labels, labeled, c, variant="plain", degrees=None):
        U0 = one_hot(labels, labeled, c)
        return cls(U0, tuple(sorted(int(i) for i in labeled)), c, build_source(U0, labeled, variant, degrees))


def solve_closed_form(op: KernelOperator, U0, F, t: float) -> np.ndarray:
    """``exp(-t L^s) U0 + t h(t L^s) F``, exact for constant F."""
    if t < 0:
        raise ValueError("time must be non-negative")
    U0 = np.asarray(U0, dtype=float)
    if t == 0:
        return U0.copy()
    return op.heat(U0, t) + op.phi(F, t)


def stability_max_dt(lambda_max: float, s: float) -> float:
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    return 2.0 / lambda_max**s


def step(U, F, kind, dt: float, op: KernelOperator, allow_unstable: bool = False) -> np.ndarray:
    kind = StepperKind.parse(kind)
    if not dt > 0:
        raise ValueError("step size must be positive")
    U = np.asarray(U, dtype=float)
    if kind is StepperKind.FORWARD_EULER:
        limit = stability_max_dt(op.lambda_max(), op.s)
        if dt >= limit and not allow_unstable:
            raise StabilityError(f"forward Euler needs dt < 2/lambda_max^s = {limit:.6g}, got dt={dt:.6g}")
        return U - dt * op.power(U) + dt * F
    if kind is StepperKind.BACKWARD_EULER:
        return op.resolvent(U + dt * F, dt)
    if kind is StepperKind.EXPONENTIAL:
        return op.heat(U, dt) + op.phi(F, dt)
    rhs = lambda V: F - op.power(V)
    k1 = rhs(U)
    k2 = rhs(U + 0.5 * dt * k1)
    k3 = rhs(U + 0.5 * dt * k2)
    k4 = rhs(U + dt * k3)
    return U + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(U0, F, kind, dt: float, T: float, op: KernelOperator, allow_unstable: bool = False,
              callback=None) -> np.ndarray:
    """March from 0 to ``T``; the last step is shortened when ``T/dt`` is not integral."""
    U = np.asarray(U0, dtype=float).copy()
    n_full = int(np.floor(T / dt + 1e-9))
    rem = T - n_full * dt
    for k in range(n_full):
        U = step(U, F, kind, dt, op, allow_unstable)
        if not np.all(np.isfinite(U)):
            raise NumericalError(f"non-finite iterate at step {k + 1}")
        if callback is not None:
            callback(k + 1, U)
    if rem > 1e-12 * max(T, 1.0):
        U = step(U, F, kind, rem, op, allow_unstable)
        if not np.all(np.isfinite(U)):
            raise NumericalError(f"non-finite iterate at step {n_full + 1}")
        if callback is not None:
            callback(n_full + 1, U)
    return U


def predict(U) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest class index."""
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[1] < 2:
        raise ValueError("prediction needs an n-by-c score matrix with c >= 2")
    return np.argmax(U, axis=1)


SCHEMES = (1, 2, 3)


def scheme_solution(op: KernelOperator, scheme: int, U0, F_scaled, t: float) -> np.ndarray:
    """Label scores for the three propagation schemes.

    1: ``exp(-t L^s) U0``; 2: ``exp(-t L^s) F``; 3: ``exp(-t L^s) U0 + t h(t L^s) F``,
    where ``F_scaled`` is the degree-scaled source.
    """
    if scheme == 1:
        return op.heat(U0, t)
    if scheme == 2:
        return op.heat(F_scaled, t)
    if scheme == 3:
        return solve_closed_form(op, U0, F_scaled, t)
    raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme}")
