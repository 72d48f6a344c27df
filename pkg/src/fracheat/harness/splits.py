"""Label splits and accuracy."""
from __future__ import annotations

import numpy as np


def sample_split(labels, per_class: int, seed, n_val: int = 0, n_test: int | None = None):
    """Class-balanced labeled set, then validation and test sets from the rest.

    ``n_test=None`` puts every remaining (non-validation) node in the test set.
    Returns three sorted index arrays.
    """
    labels = np.asarray(labels)
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    rng = np.random.default_rng(seed)
    classes = np.unique(labels)
    chosen = []
    for c in classes:
        members = np.flatnonzero(labels == c)
        if members.size < per_class:
            raise ValueError(f"class {c} has {members.size} nodes, cannot take {per_class}")
        chosen.append(rng.choice(members, per_class, replace=False))
    labeled = np.sort(np.concatenate(chosen))
    return _rest(labels.shape[0], labeled, rng, n_val, n_test)


def sample_split_total(labels, total: int, seed, n_val: int = 0, n_test: int | None = None):
    """``total`` labeled nodes drawn uniformly, without class balancing."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if not 1 <= total <= n:
        raise ValueError(f"total labels must be in [1, {n}]")
    rng = np.random.default_rng(seed)
    labeled = np.sort(rng.choice(n, total, replace=False))
    return _rest(n, labeled, rng, n_val, n_test)


def _rest(n, labeled, rng, n_val, n_test):
    rest = np.setdiff1d(np.arange(n), labeled)
    need = n_val + (n_test or 0)
    if need > rest.size:
        raise ValueError(f"need {need} validation/test nodes, only {rest.size} unlabeled")
    perm = rng.permutation(rest)
    val = np.sort(perm[:n_val])
    test = np.sort(perm[n_val:] if n_test is None else perm[n_val:n_val + n_test])
    return labeled, val, test


def accuracy(pred, truth, mask=None) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if mask is None:
        sel = np.arange(pred.shape[0])
    else:
        mask = np.asarray(mask)
        sel = np.flatnonzero(mask) if mask.dtype == bool else mask
    if sel.size == 0:
        raise ValueError("accuracy over an empty mask")
    return float(np.mean(pred[sel] == truth[sel]))
