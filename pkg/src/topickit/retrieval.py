"""Exact cosine-similarity search and the multi-query retrieval loop.

Corpus rows are required to be unit-normalized, so the exhaustive inner-product
scan scores true cosines. The retention threshold for multi-query retrieval is
the mean cosine over all unordered pairs of query vectors, and a retrieved
passage is kept when its score meets the threshold inclusively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Corpus
from .errors import DataError


@dataclass(frozen=True)
class ScoredHit:
    """A corpus row index with its cosine score against one query."""

    passage_index: int
    score: float


@dataclass(frozen=True)
class MultiQueryResult:
    """Outcome of multi-query retrieval.

    ``kept`` holds deduplicated passage indices in first-encounter order
    (queries in input order, hits in rank order); ``per_query_hits`` keeps
    each query's full top-k list for diagnostics.
    """

    threshold: float
    kept: tuple[int, ...]
    per_query_hits: tuple[tuple[ScoredHit, ...], ...]


def _as_unit(vec: Sequence[float] | np.ndarray, name: str = "vector") -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"{name} must be 1-D")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise DataError(f"{name} has zero norm")
    return arr / norm


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity u.v / (|u||v|)."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise DataError("cosine expects 1-D vectors")
    if a.shape[0] != b.shape[0]:
        raise DataError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DataError("cosine undefined for zero-norm vectors")
    return float(np.dot(a, b) / (na * nb))


def top_k(collection: Corpus, query_vec: Sequence[float] | np.ndarray, k: int) -> list[ScoredHit]:
    """Exhaustive exact top-k scan, scores descending, ties broken by ascending index."""
    if k <= 0:
        raise DataError("k must be >= 1")
    emb = collection.embeddings
    if not emb.normalized:
        raise DataError("top_k requires unit-normalized corpus rows; normalize first")
    query = _as_unit(query_vec, "query vector")
    if query.shape[0] != emb.dim:
        raise DataError(f"query dim {query.shape[0]} does not match corpus dim {emb.dim}")
    scores = emb.data @ query
    order = np.lexsort((np.arange(scores.size), -scores))
    top = order[: min(k, scores.size)]
    return [ScoredHit(int(i), float(scores[i])) for i in top]


def mean_pairwise_cosine(query_vecs: Sequence[Sequence[float] | np.ndarray]) -> float:
    """Mean cosine over all unordered pairs of query vectors; always in [-1, 1]."""
    if len(query_vecs) < 2:
        raise DataError(f"need at least 2 query vectors, got {len(query_vecs)}")
    units = [_as_unit(v, f"query vector {i}") for i, v in enumerate(query_vecs)]
    dims = {u.shape[0] for u in units}
    if len(dims) > 1:
        raise DataError(f"query vectors have mixed dims {sorted(dims)}")
    stacked = np.stack(units)
    gram = stacked @ stacked.T
    upper = gram[np.triu_indices(len(units), k=1)]
    return float(min(1.0, max(-1.0, float(upper.mean()))))


def multi_query_retrieval(
    collection: Corpus,
    query_vecs: Sequence[Sequence[float] | np.ndarray],
    k: int,
) -> MultiQueryResult:
    """Retrieve top-k per query and keep passages scoring at or above the threshold.

    The threshold is the mean pairwise cosine among the queries; retained
    indices are deduplicated in first-encounter order.
    """
    threshold = mean_pairwise_cosine(query_vecs)
    per_query = tuple(tuple(top_k(collection, q, k)) for q in query_vecs)
    kept: list[int] = []
    seen: set[int] = set()
    for hits in per_query:
        for hit in hits:
            if hit.score >= threshold and hit.passage_index not in seen:
                seen.add(hit.passage_index)
                kept.append(hit.passage_index)
    return MultiQueryResult(threshold=threshold, kept=tuple(kept), per_query_hits=per_query)
