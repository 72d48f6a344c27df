"""One-way ANOVA and pooled two-sample t-tests with p-values from the regularized incomplete beta."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc


@dataclass
class TrialStats:
    accuracies: list = field(default_factory=list)

    @property
    def n_trials(self) -> int:
        return len(self.accuracies)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies)) if self.accuracies else float("nan")

    @property
    def se_defined(self) -> bool:
        return self.n_trials >= 2

    @property
    def se(self) -> float:
        """Sample standard deviation over sqrt(n); 0 when fewer than two trials (see ``se_defined``)."""
        if not self.se_defined:
            return 0.0
        return float(np.std(self.accuracies, ddof=1) / math.sqrt(self.n_trials))

    def to_dict(self):
        return {"accuracies": list(self.accuracies), "n_trials": self.n_trials, "mean": self.mean,
                "se": self.se, "se_defined": self.se_defined}


def f_sf(F: float, d1: float, d2: float) -> float:
    """Survival function of the F(d1, d2) distribution."""
    if math.isinf(F):
        return 0.0
    if F <= 0:
        return 1.0
    return float(betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * F)))


def t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t."""
    if math.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def anova_oneway(groups) -> tuple[float, float]:
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2 or any(g.size < 2 for g in groups):
        raise ValueError("ANOVA needs at least two groups with at least two samples each")
    k = len(groups)
    N = sum(g.size for g in groups)
    grand = np.concatenate(groups).mean()
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in groups)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in groups)
    d1, d2 = k - 1, N - k
    if ss_within == 0:
        if ss_between == 0:
            return 0.0, 1.0
        return math.inf, 0.0
    F = float((ss_between / d1) / (ss_within / d2))
    return F, f_sf(F, d1, d2)


def t_test(a, b) -> tuple[float, float, int]:
    """Pooled-variance two-sided independent t-test: ``(t, p, df)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("t-test needs at least two samples per group")
    df = a.size + b.size - 2
    sp2 = (((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum()) / df
    diff = a.mean() - b.mean()
    if sp2 == 0:
        if diff == 0:
            return 0.0, 1.0, df
        return math.copysign(math.inf, diff), 0.0, df
    t = float(diff / math.sqrt(sp2 * (1.0 / a.size + 1.0 / b.size)))
    return t, t_sf2(t, df), df


def pairwise_bonferroni(groups: dict) -> list[dict]:
    """All pairwise t-tests with Bonferroni-adjusted p-values (used in place of Tukey HSD)."""
    keys = list(groups)
    pairs = list(itertools.combinations(keys, 2))
    out = []
    for a, b in pairs:
        t, p, df = t_test(groups[a], groups[b])
        out.append({"a": a, "b": b, "t": t, "df": df, "p": p, "p_bonferroni": min(1.0, p * len(pairs))})
    return out
