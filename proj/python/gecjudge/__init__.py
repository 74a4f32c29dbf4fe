"""Python bindings for the gecjudge C++ core."""

from ._gecjudge import (
    GecJudgeError,
    cronbach_alpha,
    derive_weights,
    pearson,
    principal_eigen,
    random_index,
    repair,
    run_cli,
    sentence_pairwise,
    spearman,
    weighted_score,
)

__all__ = [
    "GecJudgeError",
    "cronbach_alpha",
    "derive_weights",
    "pearson",
    "principal_eigen",
    "random_index",
    "repair",
    "run_cli",
    "sentence_pairwise",
    "spearman",
    "weighted_score",
]
