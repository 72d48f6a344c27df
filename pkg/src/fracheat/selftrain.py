"""Confidence-driven self-training on top of the exponential diffusion step."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import KernelOperator
from .solver import StepperKind, step

CONVERGENCE_TOL = 1e-6


def normalize_rows(U) -> np.ndarray:
    """Map rows onto the probability simplex: shift by the row minimum if negative, divide by the sum.

    Rows that sum to zero after the shift become uniform.
    """
    P = np.array(U, dtype=float, copy=True)
    shift = np.minimum(P.min(axis=1), 0.0)
    P -= shift[:, None]
    tot = P.sum(axis=1)
    zero = tot <= 0
    P[~zero] /= tot[~zero, None]
    P[zero] = 1.0 / P.shape[1]
    return P


def confidence(U, c: int | None = None) -> np.ndarray:
    """Row maximum minus row mean."""
    U = np.asarray(U, dtype=float)
    c = U.shape[1] if c is None else c
    return U.max(axis=1) - U.sum(axis=1) / c


def entropy(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return -terms.sum(axis=1)


def fractional_confidence(U, c: int | None, s: float) -> np.ndarray:
    """Base confidence plus ``s`` times the entropy of the simplex-normalised row."""
    return confidence(U, c) + s * entropy(normalize_rows(U))


def select_confident(conf, theta: float, labeled) -> np.ndarray:
    """Unlabeled nodes with ``conf > theta``, ascending."""
    conf = np.asarray(conf)
    mask = conf > theta
    lab = np.fromiter(labeled, dtype=int, count=len(labeled))
    mask[lab] = False
    return np.flatnonzero(mask)


def update_source(F, U_next, selected, labeled_next) -> np.ndarray:
    """Rows of previously labeled nodes keep ``F``; newly selected rows become
    ``U_next_i - mean of U_next over labeled_next``; all other rows are zero."""
    F = np.asarray(F, dtype=float)
    selected = np.asarray(selected, dtype=int)
    if selected.size == 0:
        return F.copy()
    lab = np.asarray(sorted(labeled_next), dtype=int)
    prev = np.setdiff1d(lab, selected)
    out = np.zeros_like(F)
    out[prev] = F[prev]
    out[selected] = U_next[selected] - U_next[lab].mean(axis=0)
    return out


def theta_schedule(theta0: float, k: int, T_max: int, schedule: str = "constant") -> float:
    if schedule == "constant":
        return theta0
    if schedule == "linear":
        return theta0 * (1.0 - k / T_max)
    raise ValueError(f"unknown threshold schedule {schedule!r}")


@dataclass
class SelfTrainResult:
    U: np.ndarray
    labeled: tuple
    F: np.ndarray
    history: list = field(default_factory=list)
    converged: bool = False


def self_train(op: KernelOperator, U0, F0, labeled, dt: float, theta0: float, T_max: int,
               schedule: str = "constant", conf_kind: str = "base", truth=None, eval_mask=None,
               callback=None) -> SelfTrainResult:
    """Iterate {exponential step, confidence, selection, source update}.

    Stops after ``T_max`` iterations or once ``||U_{k+1} - U_k||_F < 1e-6`` with
    nothing selected. Confidence is computed on simplex-normalised rows, so
    ``theta0 >= 1 - 1/c`` never selects under the base rule.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if T_max < 1:
        raise ValueError("T_max must be >= 1")
    if conf_kind not in ("base", "entropy"):
        raise ValueError(f"unknown confidence kind {conf_kind!r}")
    U = np.asarray(U0, dtype=float)
    F = np.asarray(F0, dtype=float)
    c = U.shape[1]
    lab = set(int(i) for i in labeled)
    history = []
    converged = False
    for k in range(T_max):
        U_next = step(U, F, StepperKind.EXPONENTIAL, dt, op)
        P = normalize_rows(U_next)
        if conf_kind == "base":
            conf = confidence(P, c)
        else:
            conf = fractional_confidence(P, c, op.s)
        theta = theta_schedule(theta0, k, T_max, schedule)
        sel = select_confident(conf, theta, lab)
        lab_next = lab | set(sel.tolist())
        F = update_source(F, U_next, sel, lab_next)
        delta = float(np.linalg.norm(U_next - U))
        rec = {"k": k, "n_labeled": len(lab_next), "n_selected": int(sel.size), "frobenius_delta": delta}
        if truth is not None:
            pred = np.argmax(U_next, axis=1)
            mask = np.ones(U.shape[0], bool) if eval_mask is None else np.asarray(eval_mask)
            rec["accuracy"] = float(np.mean(pred[mask] == np.asarray(truth)[mask]))
        history.append(rec)
        if callback is not None:
            callback(rec)
        U, lab = U_next, lab_next
        if delta < CONVERGENCE_TOL and sel.size == 0:
            converged = True
            break
    return SelfTrainResult(U, tuple(sorted(lab)), F, history, converged)
