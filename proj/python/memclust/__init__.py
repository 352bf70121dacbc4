"""Python bindings for the memclust core."""
import json

from ._memclust import (
    Bm25Index,
    Error,
    compress,
    kmeans,
    lcs_length,
    read_memory_file,
    reference_encode,
    rouge_l,
    token_budget,
    tokenize,
)
from ._memclust import evaluate_json as _evaluate_json

__all__ = [
    "Bm25Index",
    "Error",
    "compress",
    "evaluate",
    "kmeans",
    "lcs_length",
    "read_memory_file",
    "reference_encode",
    "rouge_l",
    "token_budget",
    "tokenize",
]


def evaluate(dataset, strategies=("mean", "concat", "clustering"), **kwargs):
    """Run the strategy comparison with the reference encoder and mock generator; returns the report dict."""
    return json.loads(_evaluate_json(str(dataset), list(strategies), **kwargs))
