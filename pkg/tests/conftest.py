"""Shared synthetic-data helpers for the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from topickit import corpus, evaluation


def unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    rows = rng.normal(size=(n, dim))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def make_corpus(matrix, normalize: bool = True) -> corpus.Corpus:
    """Bind a float matrix to placeholder passages, normalizing rows by default."""
    arr = np.asarray(matrix, dtype=np.float32)
    records = [corpus.PassageRecord(id=f"p{i}", text=f"passage {i}") for i in range(len(arr))]
    m = corpus.EmbeddingMatrix(arr)
    if normalize:
        m = corpus.normalize_rows(m)
    return corpus.bind(records, m)


@dataclass
class ClusterWorld:
    """A corpus of unit vectors drawn around cluster centers."""

    centers: np.ndarray
    collection: corpus.Corpus
    row_clusters: np.ndarray
    noise: float

    def sample(self, cluster: int, count: int, rng: np.random.Generator) -> np.ndarray:
        """Fresh unit vectors from one cluster's distribution."""
        raw = self.centers[cluster] + self.noise * rng.normal(size=(count, self.centers.shape[1]))
        return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def make_cluster_world(
    seed: int,
    n_clusters: int = 8,
    rows_per_cluster: int = 250,
    dim: int = 32,
    noise: float = 0.1,
    hard_pair: tuple[int, int, float] | None = None,
) -> ClusterWorld:
    """Unit-vector corpus around random cluster centers.

    `hard_pair=(topic, hard, cos)` forces the hard cluster's center to the
    given cosine similarity with the topic cluster's center.
    """
    rng = np.random.default_rng(seed)
    centers = unit_rows(rng, n_clusters, dim)
    if hard_pair is not None:
        topic, hard, target_cos = hard_pair
        anchor = centers[topic]
        stray = centers[hard] - np.dot(centers[hard], anchor) * anchor
        stray /= np.linalg.norm(stray)
        centers[hard] = target_cos * anchor + np.sqrt(1.0 - target_cos**2) * stray
    blocks = []
    labels = []
    for c in range(n_clusters):
        raw = centers[c] + noise * rng.normal(size=(rows_per_cluster, dim))
        blocks.append(raw / np.linalg.norm(raw, axis=1, keepdims=True))
        labels.extend([c] * rows_per_cluster)
    matrix = np.vstack(blocks).astype(np.float32)
    return ClusterWorld(
        centers=centers,
        collection=make_corpus(matrix),
        row_clusters=np.array(labels),
        noise=noise,
    )


def make_eval_examples(
    world: ClusterWorld,
    topic: int,
    rng: np.random.Generator,
    n_positive: int,
    n_easy: int,
    n_hard: int,
    hard_cluster: int | None = None,
) -> list[evaluation.EvalExample]:
    """Fresh P/EN/HN draws: positives from the topic, hard negatives from one cluster."""
    others = [c for c in range(len(world.centers)) if c != topic and c != hard_cluster]
    examples = []
    for vec in world.sample(topic, n_positive, rng):
        examples.append(evaluation.EvalExample(vector=vec, text="positive sample", fine_class="P"))
    for i in range(n_easy):
        cluster = others[i % len(others)]
        vec = world.sample(cluster, 1, rng)[0]
        examples.append(evaluation.EvalExample(vector=vec, text="easy negative", fine_class="EN"))
    if n_hard:
        assert hard_cluster is not None
        for vec in world.sample(hard_cluster, n_hard, rng):
            examples.append(evaluation.EvalExample(vector=vec, text="hard negative", fine_class="HN"))
    return examples
