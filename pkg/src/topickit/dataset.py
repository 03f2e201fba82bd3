"""Training set assembly: retrieved positives plus sampled negatives.

Binary datasets pair the n query vectors and m retained passages (labeled
positive) with an equal number of negatives drawn by one of three strategies:
uniform random rows (``m1``), rows mined by retrieval over negative queries
(``m2``), or an even mix of both (``m3``). Negative rows are always kept
disjoint from positive rows. Multi-class datasets merge per-class positives
and add no synthetic negatives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .errors import DataError
from .retrieval import MultiQueryResult, multi_query_retrieval

PROVENANCE_QUERY = "query"
PROVENANCE_MQR_POSITIVE = "mqr_positive"
PROVENANCE_RANDOM_NEGATIVE = "random_negative"
PROVENANCE_NEGQUERY_NEGATIVE = "negquery_negative"

NEGATIVE_LABEL = 0
POSITIVE_LABEL = 1
BINARY_CLASSES = ("negative", "positive")


@dataclass(frozen=True)
class Query:
    """An example text for a topic together with its embedding vector."""

    text: str
    vector: np.ndarray


@dataclass(frozen=True)
class QuerySet:
    """A topic's positive example queries plus optional negative queries."""

    topic: str
    positive_queries: tuple[Query, ...]
    negative_queries: tuple[Query, ...] = ()

    def __post_init__(self) -> None:
        if len(self.positive_queries) < 2:
            raise DataError(
                f"queryset {self.topic!r} needs at least 2 positive queries, "
                f"got {len(self.positive_queries)}"
            )
        dims = {len(q.vector) for q in self.positive_queries + self.negative_queries}
        if len(dims) > 1:
            raise DataError(f"queryset {self.topic!r} has mixed vector dims {sorted(dims)}")

    @property
    def dim(self) -> int:
        return len(self.positive_queries[0].vector)


@dataclass(frozen=True)
class LabeledExample:
    """One training row: vector, class label, and where it came from.

    ``source_index`` is a corpus row index, except for query-backed examples
    (provenance ``query``, or ``negquery_negative`` for the negative-query
    vectors themselves) where it is the query ordinal.
    """

    vector: np.ndarray
    label: int
    provenance: str
    source_index: int


@dataclass(frozen=True)
class LabeledDataset:
    """Labeled examples with their class list and the RNG seed that built them."""

    examples: tuple[LabeledExample, ...]
    classes: tuple[str, ...]
    seed: int
    warnings: tuple[str, ...] = ()


def build_positives(
    queries: QuerySet, result: MultiQueryResult, collection: Corpus
) -> list[LabeledExample]:
    """Label the n query vectors and the m retained passages as positives."""
    examples = [
        LabeledExample(
            vector=np.asarray(q.vector, dtype=np.float64),
            label=POSITIVE_LABEL,
            provenance=PROVENANCE_QUERY,
            source_index=ordinal,
        )
        for ordinal, q in enumerate(queries.positive_queries)
    ]
    for row in result.kept:
        examples.append(
            LabeledExample(
                vector=collection.embeddings.data[row].astype(np.float64),
                label=POSITIVE_LABEL,
                provenance=PROVENANCE_MQR_POSITIVE,
                source_index=int(row),
            )
        )
    return examples


def random_negatives(
    collection: Corpus, count: int, exclude: Iterable[int], seed: int
) -> list[LabeledExample]:
    """Sample `count` corpus rows uniformly without replacement, skipping `exclude`."""
    excluded = set(exclude)
    eligible = np.array(
        [i for i in range(collection.embeddings.rows) if i not in excluded],
        dtype=np.int64,
    )
    if count > eligible.size:
        raise DataError(
            f"requested {count} random negatives but only {eligible.size} eligible rows"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(eligible, size=count, replace=False)
    return [
        LabeledExample(
            vector=collection.embeddings.data[i].astype(np.float64),
            label=NEGATIVE_LABEL,
            provenance=PROVENANCE_RANDOM_NEGATIVE,
            source_index=int(i),
        )
        for i in chosen
    ]


def _query_negatives(
    collection: Corpus,
    neg_query_vecs: Sequence[np.ndarray],
    k: int,
    count: int,
    seed: int,
    exclude: set[int],
) -> tuple[list[LabeledExample], set[int]]:
    """query_negatives plus the set of corpus rows it consumed."""
    result = multi_query_retrieval(collection, neg_query_vecs, k)
    pool: list[LabeledExample] = [
        LabeledExample(
            vector=np.asarray(vec, dtype=np.float64),
            label=NEGATIVE_LABEL,
            provenance=PROVENANCE_NEGQUERY_NEGATIVE,
            source_index=ordinal,
        )
        for ordinal, vec in enumerate(neg_query_vecs)
    ]
    pool_rows = [row for row in result.kept if row not in exclude]
    for row in pool_rows:
        pool.append(
            LabeledExample(
                vector=collection.embeddings.data[row].astype(np.float64),
                label=NEGATIVE_LABEL,
                provenance=PROVENANCE_NEGQUERY_NEGATIVE,
                source_index=int(row),
            )
        )
    rng = np.random.default_rng(seed)
    if len(pool) > count:
        picked = sorted(rng.choice(len(pool), size=count, replace=False))
        chosen = [pool[i] for i in picked]
        used = {pool_rows[i - len(neg_query_vecs)] for i in picked if i >= len(neg_query_vecs)}
        return chosen, used
    used = set(pool_rows)
    if len(pool) < count:
        pad = random_negatives(collection, count - len(pool), exclude | used, seed + 1)
        pool = pool + pad
        used |= {ex.source_index for ex in pad}
    return pool, used


def query_negatives(
    collection: Corpus,
    neg_query_vecs: Sequence[np.ndarray],
    k: int,
    count: int,
    seed: int,
    exclude: Iterable[int] = (),
) -> list[LabeledExample]:
    """Mine negatives by retrieval over negative queries, padding randomly if short.

    The pool is the negative-query vectors themselves plus the passages their
    retrieval run keeps (minus `exclude`); oversized pools are subsampled with
    `seed`, undersized ones padded via random_negatives.
    """
    examples, _ = _query_negatives(collection, neg_query_vecs, k, count, seed, set(exclude))
    return examples


def mixed_negatives(
    collection: Corpus,
    neg_query_vecs: Sequence[np.ndarray],
    k: int,
    count: int,
    seed: int,
    exclude: Iterable[int] = (),
) -> list[LabeledExample]:
    """Half random negatives, half query-mined negatives, disjoint rows.

    Odd counts favor the query-mined half by one. That half draws first so
    random sampling cannot steal its pool rows; the random half uses seed + 1.
    """
    excluded = set(exclude)
    n_random = count // 2
    n_mined = count - n_random
    mined, used = _query_negatives(collection, neg_query_vecs, k, n_mined, seed, excluded)
    randoms = random_negatives(collection, n_random, excluded | used, seed + 1)
    return mined + randoms


def assemble_binary(
    positives: Sequence[LabeledExample],
    negatives: Sequence[LabeledExample],
    seed: int = 0,
) -> LabeledDataset:
    """Combine equal-sized positive and negative halves into a balanced dataset."""
    if len(positives) != len(negatives):
        raise DataError(
            f"imbalanced dataset: {len(positives)} positives vs {len(negatives)} negatives"
        )
    pos_rows = {e.source_index for e in positives if e.provenance == PROVENANCE_MQR_POSITIVE}
    neg_rows = {
        e.source_index for e in negatives if e.provenance == PROVENANCE_RANDOM_NEGATIVE
    }
    overlap = pos_rows & neg_rows
    if overlap:
        raise DataError(f"rows {sorted(overlap)} appear with both labels")
    examples = tuple(positives) + tuple(negatives)
    return LabeledDataset(examples=examples, classes=BINARY_CLASSES, seed=seed)


def assemble_multiclass(
    per_class: Sequence[tuple[str, Sequence[LabeledExample]]],
    seed: int = 0,
) -> LabeledDataset:
    """Merge per-class positives into one dataset; no synthetic negatives are added.

    A corpus row retained by more than one class stays under every label and is
    reported in the dataset warnings.
    """
    if len(per_class) < 2:
        raise DataError(f"multi-class assembly needs >= 2 classes, got {len(per_class)}")
    names = [name for name, _ in per_class]
    if len(set(names)) != len(names):
        raise DataError(f"duplicate class names in {names}")
    examples: list[LabeledExample] = []
    row_owners: dict[int, list[str]] = {}
    for index, (name, positives) in enumerate(per_class):
        for example in positives:
            examples.append(replace(example, label=index))
            if example.provenance == PROVENANCE_MQR_POSITIVE:
                row_owners.setdefault(example.source_index, []).append(name)
    warnings = tuple(
        f"passage row {row} retained by classes {', '.join(owners)}"
        for row, owners in sorted(row_owners.items())
        if len(owners) > 1
    )
    return LabeledDataset(
        examples=tuple(examples), classes=tuple(names), seed=seed, warnings=warnings
    )


def split_train_val(
    dataset: LabeledDataset, ratio: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified split: per class, floor(ratio * count) examples go to train."""
    if not 0.0 < ratio < 1.0:
        raise DataError(f"split ratio must be in (0, 1), got {ratio}")
    if not dataset.examples:
        raise DataError("cannot split an empty dataset")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    val_idx: list[int] = []
    for label, name in enumerate(dataset.classes):
        members = [i for i, e in enumerate(dataset.examples) if e.label == label]
        if not members:
            raise DataError(f"class {name!r} has no examples")
        perm = rng.permutation(len(members))
        n_train = int(ratio * len(members))
        if len(members) >= 2:
            n_train = min(n_train, len(members) - 1)
        train_idx.extend(members[i] for i in perm[:n_train])
        val_idx.extend(members[i] for i in perm[n_train:])
    train = tuple(dataset.examples[i] for i in sorted(train_idx))
    val = tuple(dataset.examples[i] for i in sorted(val_idx))
    return (
        LabeledDataset(examples=train, classes=dataset.classes, seed=seed),
        LabeledDataset(examples=val, classes=dataset.classes, seed=seed),
    )


def write_dataset(dataset: LabeledDataset, path: str | Path) -> None:
    """Export examples as JSONL: label, provenance, source_index, vector."""
    with open(path, "w", encoding="utf-8") as fh:
        for example in dataset.examples:
            fh.write(
                json.dumps(
                    {
                        "label": example.label,
                        "provenance": example.provenance,
                        "source_index": example.source_index,
                        "vector": [float(x) for x in example.vector],
                    }
                )
            )
            fh.write("\n")


def read_dataset(
    path: str | Path, classes: Sequence[str] | None = None, seed: int = 0
) -> LabeledDataset:
    """Load a dataset export; classes default to binary negative/positive."""
    path = Path(path)
    examples: list[LabeledExample] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON: {exc.msg}") from exc
            try:
                examples.append(
                    LabeledExample(
                        vector=np.asarray(obj["vector"], dtype=np.float64),
                        label=int(obj["label"]),
                        provenance=str(obj["provenance"]),
                        source_index=int(obj["source_index"]),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise DataError(f"{path}: line {lineno}: malformed example: {exc}") from exc
    if not examples:
        raise DataError(f"{path}: dataset is empty")
    labels = {e.label for e in examples}
    if classes is None:
        if not labels <= {0, 1}:
            raise DataError(
                f"{path}: labels {sorted(labels)} need an explicit class list"
            )
        class_names = BINARY_CLASSES
    else:
        class_names = tuple(classes)
        if max(labels) >= len(class_names):
            raise DataError(
                f"{path}: label {max(labels)} out of range for {len(class_names)} classes"
            )
    dims = {e.vector.shape[0] for e in examples}
    if len(dims) > 1:
        raise DataError(f"{path}: examples have mixed vector dims {sorted(dims)}")
    return LabeledDataset(examples=tuple(examples), classes=class_names, seed=seed)


def load_queryset(path: str | Path) -> QuerySet:
    """Load a queryset JSON file: topic plus inline query texts and vectors."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict) or "topic" not in obj or "positive_queries" not in obj:
        raise DataError(f"{path}: expected an object with 'topic' and 'positive_queries'")

    def parse_queries(entries: object, kind: str) -> tuple[Query, ...]:
        if not isinstance(entries, list):
            raise DataError(f"{path}: {kind} must be a list")
        queries = []
        for i, entry in enumerate(entries):
            if (
                not isinstance(entry, dict)
                or not isinstance(entry.get("text"), str)
                or not isinstance(entry.get("vector"), list)
            ):
                raise DataError(f"{path}: {kind}[{i}] needs 'text' and 'vector' fields")
            queries.append(
                Query(text=entry["text"], vector=np.asarray(entry["vector"], dtype=np.float64))
            )
        return tuple(queries)

    return QuerySet(
        topic=str(obj["topic"]),
        positive_queries=parse_queries(obj["positive_queries"], "positive_queries"),
        negative_queries=parse_queries(obj.get("negative_queries", []), "negative_queries"),
    )
