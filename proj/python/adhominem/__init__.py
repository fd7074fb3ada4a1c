"""Neural authorship verification: Python access to the C++ core."""

from ._core import (
    DomainError,
    Error,
    Model,
    __version__,
    classify_distance,
    count_tokens,
    kendall_tau,
    normalize,
    pair_loss,
    run_cli,
    synthetic_corpus,
    tokenize,
)

__all__ = [
    "DomainError",
    "Error",
    "Model",
    "classify_distance",
    "count_tokens",
    "kendall_tau",
    "normalize",
    "pair_loss",
    "run_cli",
    "synthetic_corpus",
    "tokenize",
]
