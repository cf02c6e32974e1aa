"""Vaccine narrative classification with a classification-aware topic model."""

from ._core import (
    CLASSES,
    Model,
    NarrativeError,
    Service,
    class_distribution,
    clean,
    cross_validate,
    load_dataset,
    match_rules,
    metrics,
    run_cli,
    stratified_kfold,
    synthetic_corpus,
    tokenize,
)

__all__ = [
    "CLASSES",
    "Model",
    "NarrativeError",
    "Service",
    "class_distribution",
    "clean",
    "cross_validate",
    "load_dataset",
    "match_rules",
    "metrics",
    "run_cli",
    "stratified_kfold",
    "synthetic_corpus",
    "tokenize",
]
