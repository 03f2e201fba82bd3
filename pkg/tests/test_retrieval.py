"""Exact search, the pairwise-cosine threshold, and multi-query retrieval."""

import math

import numpy as np
import pytest

from conftest import make_corpus, unit_rows
from topickit import retrieval
from topickit.errors import DataError


def oracle_cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    return dot / (nu * nv)


def oracle_top_k(matrix, query, k):
    """Full sort-then-truncate with ties broken by ascending index."""
    qn = [x / math.sqrt(sum(v * v for v in query)) for x in query]
    scores = [sum(float(a) * b for a, b in zip(row, qn)) for row in matrix]
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return [(i, scores[i]) for i in order[: min(k, len(scores))]]


def oracle_threshold(vectors):
    pairs = [
        oracle_cosine(vectors[i], vectors[j])
        for i in range(len(vectors))
        for j in range(i + 1, len(vectors))
    ]
    return sum(pairs) / len(pairs)


class TestCosine:
    def test_identity(self):
        assert retrieval.cosine([1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_orthogonal(self):
        assert retrieval.cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_forty_five_degrees(self):
        s = 1.0 / math.sqrt(2.0)
        assert retrieval.cosine([1.0, 0.0], [s, s]) == pytest.approx(0.70710678, abs=1e-7)

    def test_symmetric_and_scale_free(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            u, v = rng.normal(size=(2, 6))
            assert retrieval.cosine(u, v) == pytest.approx(retrieval.cosine(v, u))
            assert retrieval.cosine(3.5 * u, v) == pytest.approx(retrieval.cosine(u, v))

    def test_dim_mismatch(self):
        with pytest.raises(DataError, match="2 vs 3"):
            retrieval.cosine([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_zero_norm(self):
        with pytest.raises(DataError, match="zero"):
            retrieval.cosine([0.0, 0.0], [1.0, 0.0])


class TestTopK:
    def test_self_match(self):
        rng = np.random.default_rng(1)
        collection = make_corpus(rng.normal(size=(12, 4)))
        query = collection.embeddings.data[7]
        hits = retrieval.top_k(collection, query, 1)
        assert hits[0].passage_index == 7
        assert hits[0].score == pytest.approx(1.0, abs=1e-6)

    def test_k_saturates_at_row_count(self):
        rng = np.random.default_rng(2)
        collection = make_corpus(rng.normal(size=(5, 3)))
        hits = retrieval.top_k(collection, [1.0, 0.0, 0.0], 99)
        assert len(hits) == 5
        scores = [h.score for h in hits]
        assert scores == sorted(scores, reverse=True)

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(3)
        matrix = unit_rows(rng, 100, 8).astype(np.float32)
        collection = make_corpus(matrix)
        for _ in range(10):
            query = rng.normal(size=8)
            query /= np.linalg.norm(query)
            hits = retrieval.top_k(collection, query, 10)
            expected = oracle_top_k(collection.embeddings.data, query, 10)
            assert [h.passage_index for h in hits] == [i for i, _ in expected]
            for hit, (_, score) in zip(hits, expected):
                assert hit.score == pytest.approx(score, abs=1e-6)

    def test_ties_break_by_ascending_index(self):
        row = np.array([0.6, 0.8])
        collection = make_corpus(np.stack([row, [1.0, 0.0], row, row]))
        hits = retrieval.top_k(collection, row, 3)
        assert [h.passage_index for h in hits] == [0, 2, 3]

    def test_k_zero_rejected(self):
        collection = make_corpus([[1.0, 0.0]])
        with pytest.raises(DataError, match="k"):
            retrieval.top_k(collection, [1.0, 0.0], 0)

    def test_dim_mismatch(self):
        collection = make_corpus([[1.0, 0.0]])
        with pytest.raises(DataError, match="dim"):
            retrieval.top_k(collection, [1.0, 0.0, 0.0], 1)

    def test_requires_normalized_rows(self):
        collection = make_corpus([[3.0, 4.0]], normalize=False)
        with pytest.raises(DataError, match="normaliz"):
            retrieval.top_k(collection, [1.0, 0.0], 1)


class TestMeanPairwiseCosine:
    def test_identical_vectors(self):
        assert retrieval.mean_pairwise_cosine([[1.0, 0.0], [1.0, 0.0]]) == 1.0

    def test_orthogonal_vectors(self):
        assert retrieval.mean_pairwise_cosine([[1.0, 0.0], [0.0, 1.0]]) == 0.0

    def test_three_angles(self):
        vectors = [
            [1.0, 0.0],
            [math.cos(math.radians(60)), math.sin(math.radians(60))],
            [0.0, 1.0],
        ]
        expected = (0.5 + 0.0 + math.cos(math.radians(30))) / 3
        assert expected == pytest.approx(0.45534180, abs=1e-7)
        assert retrieval.mean_pairwise_cosine(vectors) == pytest.approx(expected, abs=1e-7)

    def test_permutation_invariant_and_bounded(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            n = int(rng.integers(2, 9))
            vectors = rng.normal(size=(n, 5))
            value = retrieval.mean_pairwise_cosine(vectors)
            assert -1.0 <= value <= 1.0
            perm = rng.permutation(n)
            assert retrieval.mean_pairwise_cosine(vectors[perm]) == pytest.approx(
                value, abs=1e-12
            )

    def test_requires_two_vectors(self):
        with pytest.raises(DataError, match="2"):
            retrieval.mean_pairwise_cosine([[1.0, 0.0]])

    def test_zero_norm_vector(self):
        with pytest.raises(DataError, match="zero"):
            retrieval.mean_pairwise_cosine([[1.0, 0.0], [0.0, 0.0]])


class TestMultiQueryRetrieval:
    def test_identical_queries_keep_exact_match_inclusively(self):
        collection = make_corpus([[1.0, 0.0], [0.6, 0.8], [0.0, 1.0]])
        result = retrieval.multi_query_retrieval(collection, [[1.0, 0.0], [1.0, 0.0]], 5)
        assert result.threshold == 1.0
        assert result.kept == (0,)

    def test_no_passage_reaches_threshold(self):
        collection = make_corpus([[-0.6, -0.8], [-1.0, -0.1]])
        result = retrieval.multi_query_retrieval(collection, [[1.0, 0.0], [0.0, 1.0]], 2)
        assert result.threshold == 0.0
        assert result.kept == ()

    def test_matches_exhaustive_filter_oracle(self):
        angles = [0, 30, 55, 80, 120, 170, 200, 300]
        matrix = [[math.cos(math.radians(a)), math.sin(math.radians(a))] for a in angles]
        collection = make_corpus(matrix)
        queries = [[1.0, 0.2], [0.8, 0.6]]
        k = 3
        result = retrieval.multi_query_retrieval(collection, queries, k)
        threshold = oracle_threshold(queries)
        expected = []
        for q in queries:
            for idx, score in oracle_top_k(collection.embeddings.data, q, k):
                if score >= threshold and idx not in expected:
                    expected.append(idx)
        assert result.threshold == pytest.approx(threshold, abs=1e-9)
        assert list(result.kept) == expected

    def test_kept_monotone_in_k(self):
        rng = np.random.default_rng(5)
        collection = make_corpus(rng.normal(size=(50, 6)))
        queries = unit_rows(rng, 3, 6)
        previous: set[int] = set()
        for k in (1, 3, 10, 50):
            kept = set(retrieval.multi_query_retrieval(collection, queries, k).kept)
            assert previous <= kept
            previous = kept

    def test_scaling_queries_changes_nothing(self):
        rng = np.random.default_rng(6)
        collection = make_corpus(rng.normal(size=(30, 4)))
        queries = rng.normal(size=(3, 4))
        base = retrieval.multi_query_retrieval(collection, queries, 5)
        scaled = queries.copy()
        scaled[1] *= 41.5
        again = retrieval.multi_query_retrieval(collection, scaled, 5)
        assert again.threshold == pytest.approx(base.threshold, abs=1e-12)
        assert again.kept == base.kept

    def test_kept_scores_meet_threshold(self):
        rng = np.random.default_rng(7)
        collection = make_corpus(rng.normal(size=(40, 5)))
        queries = unit_rows(rng, 4, 5)
        result = retrieval.multi_query_retrieval(collection, queries, 8)
        best = {}
        for hits in result.per_query_hits:
            for hit in hits:
                best[hit.passage_index] = max(best.get(hit.passage_index, -2.0), hit.score)
        for idx in result.kept:
            assert best[idx] >= result.threshold
