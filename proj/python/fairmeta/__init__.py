"""Python bindings for the fairmeta core library."""

from ._fairmeta import (
    ConfusionCounts,
    Corpus,
    DegenerateVariance,
    FairmetaError,
    FormatError,
    InvalidQuery,
    LengthMismatch,
    MalformedRecord,
    MissingCorpus,
    TooFewPairs,
    canonical_field_name,
    canonicalize,
    cohens_d_paired,
    confusion,
    evaluate_suite,
    metrics,
    paired_t_test,
    standardize_rule,
    tissue_label,
)

__all__ = [
    "ConfusionCounts",
    "Corpus",
    "DegenerateVariance",
    "FairmetaError",
    "FormatError",
    "InvalidQuery",
    "LengthMismatch",
    "MalformedRecord",
    "MissingCorpus",
    "TooFewPairs",
    "canonical_field_name",
    "canonicalize",
    "cohens_d_paired",
    "confusion",
    "evaluate_suite",
    "metrics",
    "paired_t_test",
    "standardize_rule",
    "tissue_label",
]
