"""Binary classification metrics, method ranking, and reference baselines.

Evaluation examples carry a fine-grained class (P = positive, EN = easy
negative, HN = hard negative); the coarse gold label is positive exactly for
P. Reports include F1 and accuracy plus per-fine-class accuracy so the easy
and hard negative behavior of a method can be told apart.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import EmbeddingMatrix
from .errors import DataError
from .retrieval import cosine, mean_pairwise_cosine

logger = logging.getLogger(__name__)

FINE_CLASSES = ("P", "EN", "HN")

DEFAULT_STOPWORDS = frozenset(
    """a about above after again against all am an and any are as at be because
    been before being below between both but by can did do does doing down
    during each few for from further had has have having he her here hers
    herself him himself his how i if in into is it its itself just me more
    most my myself no nor not now of off on once only or other our ours
    ourselves out over own same she should so some such than that the their
    theirs them themselves then there these they this those through to too
    under until up very was we were what when where which while who whom why
    will with you your yours yourself yourselves""".split()
)

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class EvalExample:
    """One labeled evaluation sample with its embedding vector."""

    vector: np.ndarray
    text: str
    fine_class: str

    def __post_init__(self) -> None:
        if self.fine_class not in FINE_CLASSES:
            raise DataError(f"fine_class must be one of {FINE_CLASSES}, got {self.fine_class!r}")

    @property
    def gold_positive(self) -> bool:
        return self.fine_class == "P"


@dataclass(frozen=True)
class EvalReport:
    """Confusion counts and derived metrics for one method."""

    method: str
    tp: int
    fp: int
    tn: int
    fn: int
    f1: float
    accuracy: float
    per_fine_class_accuracy: dict[str, float]

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "per_fine_class_accuracy": dict(self.per_fine_class_accuracy),
        }


def score(
    predictions: Sequence[bool], examples: Sequence[EvalExample], method: str = "model"
) -> EvalReport:
    """Confusion counts, positive-class F1, accuracy, and per-fine-class accuracy."""
    if len(predictions) != len(examples):
        raise DataError(
            f"{len(predictions)} predictions for {len(examples)} examples"
        )
    tp = fp = tn = fn = 0
    fine_total: dict[str, int] = {}
    fine_correct: dict[str, int] = {}
    for predicted, example in zip(predictions, examples):
        gold = example.gold_positive
        if predicted and gold:
            tp += 1
        elif predicted and not gold:
            fp += 1
        elif not predicted and gold:
            fn += 1
        else:
            tn += 1
        fine_total[example.fine_class] = fine_total.get(example.fine_class, 0) + 1
        if predicted == gold:
            fine_correct[example.fine_class] = fine_correct.get(example.fine_class, 0) + 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / len(examples) if examples else 0.0
    per_fine = {
        cls: fine_correct.get(cls, 0) / total for cls, total in sorted(fine_total.items())
    }
    return EvalReport(
        method=method,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        f1=f1,
        accuracy=accuracy,
        per_fine_class_accuracy=per_fine,
    )


def average_rank(score_table: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    """Mean per-category rank of each method; rank 1 is best, ties share the minimum."""
    methods = list(score_table)
    if not methods:
        raise DataError("score table is empty")
    categories = list(score_table[methods[0]])
    for method in methods:
        missing = set(categories) ^ set(score_table[method])
        if missing:
            raise DataError(f"method {method!r} missing categories {sorted(missing)}")
    totals = {method: 0.0 for method in methods}
    for category in categories:
        values = {m: score_table[m][category] for m in methods}
        for method in methods:
            rank = 1 + sum(1 for other in methods if values[other] > values[method])
            totals[method] += rank
    return {method: totals[method] / len(categories) for method in methods}


def baseline_random(examples: Sequence[EvalExample], seed: int) -> list[bool]:
    """Predict positive with probability one half, reproducibly from the seed."""
    rng = np.random.default_rng(seed)
    return [bool(v) for v in rng.random(len(examples)) < 0.5]


def _tokens(text: str) -> set[str]:
    return {t for t in _TOKEN_SPLIT.split(text.lower()) if t}


def baseline_keyword(
    examples: Sequence[EvalExample],
    query_texts: Sequence[str],
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
) -> list[bool]:
    """Predict positive when any filtered query token occurs in the example text.

    Query tokens are lowercased, split on non-alphanumeric boundaries, and
    filtered of stopwords and tokens shorter than three characters.
    """
    keywords: set[str] = set()
    for text in query_texts:
        keywords |= {t for t in _tokens(text) if t not in stopwords and len(t) >= 3}
    if not keywords:
        logger.warning("keyword baseline: no query tokens survive filtering; predicting all negative")
        return [False] * len(examples)
    return [bool(keywords & _tokens(example.text)) for example in examples]


def baseline_dense(
    examples: Sequence[EvalExample], query_vecs: Sequence[np.ndarray]
) -> list[bool]:
    """Predict positive when any query's cosine meets the mean-pairwise threshold."""
    threshold = mean_pairwise_cosine(query_vecs)
    return [
        max(cosine(q, example.vector) for q in query_vecs) >= threshold
        for example in examples
    ]


def load_eval_examples(path: str | Path, matrix: EmbeddingMatrix) -> list[EvalExample]:
    """Read eval JSONL (text, fine_class) rows paired with embedding matrix rows."""
    path = Path(path)
    entries: list[tuple[str, str]] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON: {exc.msg}") from exc
            if (
                not isinstance(obj, dict)
                or not isinstance(obj.get("text"), str)
                or obj.get("fine_class") not in FINE_CLASSES
            ):
                raise DataError(
                    f"{path}: line {lineno}: expected fields 'text' and "
                    f"'fine_class' in {FINE_CLASSES}"
                )
            entries.append((obj["text"], obj["fine_class"]))
    if len(entries) != matrix.rows:
        raise DataError(
            f"{path}: {len(entries)} eval rows but embedding file has {matrix.rows} rows"
        )
    return [
        EvalExample(vector=matrix.data[i].astype(np.float64), text=text, fine_class=fine)
        for i, (text, fine) in enumerate(entries)
    ]
