"""Datasets, splits, trial orchestration, statistics and reporting."""
from .datasets import TwoMoonConfig, knn_graph, load_cora, moon_points, two_moon
from .splits import accuracy, sample_split, sample_split_total
from .stats import TrialStats, anova_oneway, pairwise_bonferroni, t_test
from .trials import ExperimentConfig, load_preset, run_trial, run_trials, scheme_tests

__all__ = [
    "TwoMoonConfig", "knn_graph", "load_cora", "moon_points", "two_moon",
    "accuracy", "sample_split", "sample_split_total",
    "TrialStats", "anova_oneway", "pairwise_bonferroni", "t_test",
    "ExperimentConfig", "load_preset", "run_trial", "run_trials", "scheme_tests",
]
