"""Seeded trial orchestration for the propagation schemes."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .. import spectral
from ..graph import LaplacianKind, laplacian
from ..operators import SpectralExact, build_operator
from ..solver import SCHEMES, build_source, one_hot, predict, scheme_solution
from .datasets import TwoMoonConfig, load_cora, two_moon
from .splits import accuracy, sample_split, sample_split_total
from .stats import TrialStats, anova_oneway, pairwise_bonferroni

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"


@dataclass
class ExperimentConfig:
    """One grid of (s, labels, scheme) cells evaluated over seeded trials.

    ``times`` maps ``str(s)`` to candidate diffusion times; with more than one
    candidate the time is chosen per trial and scheme on the validation set.
    ``labels`` counts labels per class unless ``labels_total`` is set.
    """

    dataset: str = "two_moon"
    kind: str = "sym"
    schemes: list = field(default_factory=lambda: [1, 2, 3])
    s_values: list = field(default_factory=lambda: [0.2, 1.0])
    labels: list = field(default_factory=lambda: [2, 3, 5])
    times: dict = field(default_factory=lambda: {"0.2": [1.0], "1.0": [30.0]})
    labels_total: bool = False
    trials: int = 50
    seed: int = 0
    strategy: str = "spectral"
    variant: str = "degree_scaled"
    n: int = 1000
    noise: float = 0.15
    k: int = 10
    bandwidth: str = "mean"
    scale: float = 1.0
    cora_edges: str | None = None
    cora_labels: str | None = None
    n_val: int = 0
    n_test: int | None = None
    workers: int = 1

    def __post_init__(self):
        LaplacianKind.parse(self.kind)
        for s in self.s_values:
            spectral.check_order(s)
            if self.time_candidates(s) is None:
                raise ValueError(f"no diffusion time configured for s={s}")
        for sc in self.schemes:
            if sc not in SCHEMES:
                raise ValueError(f"scheme must be one of {SCHEMES}, got {sc}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.dataset not in ("two_moon", "cora"):
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.dataset == "cora":
            for p in (self.cora_edges, self.cora_labels):
                if p is None or not Path(p).is_file():
                    raise FileNotFoundError(f"Cora file not found: {p}")

    def time_candidates(self, s):
        for key, ts in self.times.items():
            if float(key) == float(s):
                return [float(t) for t in (ts if isinstance(ts, (list, tuple)) else [ts])]
        return None

    def moon(self, seed=0) -> TwoMoonConfig:
        return TwoMoonConfig(self.n, self.noise, seed, self.k, self.bandwidth, self.scale)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names - {"description"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in d.items() if k in names})


def preset_names() -> list[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.json"))


def load_preset(name_or_path, **overrides) -> ExperimentConfig:
    """Config from a bundled preset name or a JSON file; ``overrides`` replace keys before validation."""
    p = Path(name_or_path)
    if not p.is_file():
        p = PRESET_DIR / f"{name_or_path}.json"
        if not p.is_file():
            raise FileNotFoundError(f"no preset or config file {name_or_path!r}; presets: {preset_names()}")
    with open(p, encoding="utf-8") as fh:
        d = json.load(fh)
    d.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(d)


def trial_seed(master: int, trial: int, *extra) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master), int(trial), *map(int, extra)])


_CORA_CACHE = {}


def _cora(config):
    key = (config.cora_edges, config.cora_labels, config.kind)
    if key not in _CORA_CACHE:
        g, y = load_cora(config.cora_edges, config.cora_labels)
        spec = None
        if config.strategy == "spectral":
            spec = spectral.eigendecompose(laplacian(g, config.kind))
        _CORA_CACHE[key] = (g, y, spec)
    return _CORA_CACHE[key]


def run_trial(config: ExperimentConfig, trial: int) -> dict:
    """Accuracies of one trial: ``{(s, labels, scheme): (accuracy, t)}``."""
    if config.dataset == "two_moon":
        rng = np.random.default_rng(trial_seed(config.seed, trial, 0))
        _, y, g = two_moon(config.moon(), rng=rng)
        spec = None
        if config.strategy == "spectral":
            spec = spectral.eigendecompose(laplacian(g, config.kind))
    else:
        g, y, spec = _cora(config)
    c = int(y.max()) + 1
    ops = {}
    L = laplacian(g, config.kind) if spec is not None else None
    for s in config.s_values:
        if spec is not None:
            ops[s] = SpectralExact(L, s, spec=spec)
        else:
            ops[s] = build_operator(g, config.kind, s, strategy=config.strategy)
    out = {}
    for per in config.labels:
        split_seed = trial_seed(config.seed, trial, 1, per)
        if config.labels_total:
            lab, val, test = sample_split_total(y, per, split_seed, config.n_val, config.n_test)
        else:
            lab, val, test = sample_split(y, per, split_seed, config.n_val, config.n_test)
        U0 = one_hot(y, lab, c)
        F = build_source(U0, lab, config.variant, g.degrees)
        for s in config.s_values:
            cands = config.time_candidates(s)
            for sc in config.schemes:
                best = None
                for t in cands:
                    pred = predict(scheme_solution(ops[s], sc, U0, F, t))
                    score = accuracy(pred, y, val) if (len(cands) > 1 and val.size) else 0.0
                    if best is None or score > best[0]:
                        best = (score, t, accuracy(pred, y, test))
                out[(s, per, sc)] = (best[2], best[1])
    return out


def _run_one(args):
    return run_trial(*args)


def run_trials(config: ExperimentConfig) -> dict:
    """``{(s, labels, scheme): {"stats": TrialStats, "times": [t per trial]}}``.

    Per-trial seeds come from (master seed, trial index), so results do not
    depend on ``config.workers``.
    """
    jobs = [(config, i) for i in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as ex:
            per_trial = list(ex.map(_run_one, jobs))
    else:
        per_trial = [_run_one(j) for j in jobs]
    results = {}
    for rec in per_trial:
        for key, (acc, t) in rec.items():
            cell = results.setdefault(key, {"stats": TrialStats(), "times": []})
            cell["stats"].accuracies.append(acc)
            cell["times"].append(t)
    return results


def scheme_tests(config: ExperimentConfig, results: dict) -> list[dict]:
    """ANOVA across schemes and Bonferroni pairwise t-tests for each (s, labels)."""
    tests = []
    if len(config.schemes) < 2 or config.trials < 2:
        return tests
    for s in config.s_values:
        for per in config.labels:
            groups = {sc: results[(s, per, sc)]["stats"].accuracies for sc in config.schemes}
            F, p = anova_oneway(list(groups.values()))
            tests.append({"s": s, "labels": per, "anova": {"F": F, "p": p},
                          "pairwise": pairwise_bonferroni(groups), "post_hoc": "bonferroni-t (in place of Tukey HSD)"})
    return tests
