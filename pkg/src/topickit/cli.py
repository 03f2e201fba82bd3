"""Command-line pipeline: index, build-dataset, train, refine, classify, evaluate, sweep.

Every command is a pure function of its input files, flags, and seed, and
reruns produce byte-identical outputs. Exit codes: 0 success, 1 usage error,
2 data/validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import shutil
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import classifier, corpus, dataset, evaluation, retrieval
from .errors import DataError, NumericError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

DEFAULT_SEED = 1234
DEFAULT_K_SINGLE = 10_000
DEFAULT_K_MULTICLASS = 50
DEFAULT_VAL_RATIO = 0.2

INDEX_MANIFEST = "manifest.json"
INDEX_EMBEDDINGS = "embeddings.drem"
INDEX_PASSAGES = "passages.jsonl"
DATASET_FILE = "dataset.jsonl"
DIAGNOSTICS_FILE = "diagnostics.json"
MODEL_FILE = "model.json"
HISTORY_FILE = "history.json"

STRATEGIES = ("m1", "m2", "m3")
BASELINES = ("random", "keyword", "dense")


class UsageError(Exception):
    """Bad flags or an unusable configuration."""


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _read_json(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DataError(f"{path}: expected a JSON object")
    return doc


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_index(
    passages_path: str | Path,
    embeddings_path: str | Path,
    out_dir: str | Path,
    force: bool = False,
) -> dict:
    """Validate a passage/embedding pair, normalize rows, and write an index dir."""
    out_dir = Path(out_dir)
    manifest_path = out_dir / INDEX_MANIFEST
    if manifest_path.exists() and not force:
        raise UsageError(f"index already exists at {out_dir}; pass --force to rebuild")
    passages = corpus.load_passages(passages_path)
    matrix = corpus.load_embeddings(embeddings_path)
    try:
        corpus.bind(passages, matrix)
    except DataError as exc:
        raise DataError(f"{passages_path} vs {embeddings_path}: {exc}") from exc
    normalized = corpus.normalize_rows(matrix)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus.write_embeddings(normalized, out_dir / INDEX_EMBEDDINGS)
    shutil.copyfile(passages_path, out_dir / INDEX_PASSAGES)
    manifest = {
        "format": "topickit-index",
        "version": 1,
        "rows": normalized.rows,
        "dim": normalized.dim,
        "normalized": True,
        "passages_file": INDEX_PASSAGES,
        "embeddings_file": INDEX_EMBEDDINGS,
        "embeddings_sha256": _sha256(out_dir / INDEX_EMBEDDINGS),
    }
    _write_json(manifest_path, manifest)
    return manifest


def load_index(index_dir: str | Path) -> corpus.Corpus:
    """Load an index dir back into a bound, checksum-verified corpus."""
    index_dir = Path(index_dir)
    manifest = _read_json(index_dir / INDEX_MANIFEST)
    if manifest.get("format") != "topickit-index" or manifest.get("version") != 1:
        raise DataError(f"{index_dir}: not a recognized index directory")
    embeddings_path = index_dir / str(manifest["embeddings_file"])
    if _sha256(embeddings_path) != manifest.get("embeddings_sha256"):
        raise DataError(f"{embeddings_path}: checksum mismatch, index is corrupt")
    passages = corpus.load_passages(index_dir / str(manifest["passages_file"]))
    matrix = corpus.load_embeddings(embeddings_path)
    return corpus.bind(passages, matrix)


def _build_binary(
    collection: corpus.Corpus,
    queryset: dataset.QuerySet,
    k_eff: int,
    strategy: str,
    seed: int,
) -> tuple[dataset.LabeledDataset, dict]:
    pos_vecs = [q.vector for q in queryset.positive_queries]
    result = retrieval.multi_query_retrieval(collection, pos_vecs, k_eff)
    positives = dataset.build_positives(queryset, result, collection)
    pos_rows = {
        e.source_index
        for e in positives
        if e.provenance == dataset.PROVENANCE_MQR_POSITIVE
    }
    count = len(positives)
    neg_vecs = [q.vector for q in queryset.negative_queries]
    if strategy == "m1":
        negatives = dataset.random_negatives(collection, count, pos_rows, seed)
    elif strategy == "m2":
        negatives = dataset.query_negatives(
            collection, neg_vecs, k_eff, count, seed, exclude=pos_rows
        )
    else:
        negatives = dataset.mixed_negatives(
            collection, neg_vecs, k_eff, count, seed, exclude=pos_rows
        )
    built = dataset.assemble_binary(positives, negatives, seed=seed)
    per_query_kept = [
        sum(1 for hit in hits if hit.score >= result.threshold)
        for hits in result.per_query_hits
    ]
    diagnostics = {
        "topic": queryset.topic,
        "strategy": strategy,
        "threshold": result.threshold,
        "n_queries": len(queryset.positive_queries),
        "retained_passages": len(result.kept),
        "per_query_kept": per_query_kept,
    }
    return built, diagnostics


def run_build_dataset(
    index_dir: str | Path,
    queryset_paths: Sequence[str | Path],
    out_dir: str | Path,
    k: int | None = None,
    strategy: str | None = None,
    seed: int = DEFAULT_SEED,
) -> dict:
    """Run retrieval and negative sampling, writing a dataset export and diagnostics."""
    collection = load_index(index_dir)
    querysets = [dataset.load_queryset(p) for p in queryset_paths]
    for qs in querysets:
        if qs.dim != collection.embeddings.dim:
            raise DataError(
                f"queryset {qs.topic!r} dim {qs.dim} does not match "
                f"corpus dim {collection.embeddings.dim}"
            )
    multiclass = len(querysets) > 1
    if k is None:
        k = DEFAULT_K_MULTICLASS if multiclass else DEFAULT_K_SINGLE
    if k < 1:
        raise UsageError("--k must be >= 1")
    rows = collection.embeddings.rows
    k_eff = min(k, rows)

    if multiclass:
        if strategy is not None:
            raise UsageError("--neg-strategy does not apply to multi-class builds")
        per_class = []
        per_class_diag = []
        for qs in querysets:
            pos_vecs = [q.vector for q in qs.positive_queries]
            result = retrieval.multi_query_retrieval(collection, pos_vecs, k_eff)
            positives = dataset.build_positives(qs, result, collection)
            per_class.append((qs.topic, positives))
            per_class_diag.append(
                {
                    "topic": qs.topic,
                    "threshold": result.threshold,
                    "n_queries": len(qs.positive_queries),
                    "retained_passages": len(result.kept),
                }
            )
        built = dataset.assemble_multiclass(per_class, seed=seed)
        diagnostics = {"classes": list(built.classes), "per_class": per_class_diag}
    else:
        qs = querysets[0]
        if strategy is None:
            strategy = "m3" if qs.negative_queries else "m1"
        if strategy not in STRATEGIES:
            raise UsageError(f"--neg-strategy must be one of {STRATEGIES}")
        if strategy in ("m2", "m3") and not qs.negative_queries:
            raise UsageError(f"strategy {strategy} requires negative queries in the queryset")
        built, diagnostics = _build_binary(collection, qs, k_eff, strategy, seed)
        diagnostics["classes"] = list(built.classes)

    diagnostics.update(
        {
            "seed": seed,
            "k_requested": k,
            "k_effective": k_eff,
            "clamped": k_eff < k,
            "examples": len(built.examples),
            "warnings": list(built.warnings),
        }
    )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset.write_dataset(built, out_dir / DATASET_FILE)
    _write_json(out_dir / DIAGNOSTICS_FILE, diagnostics)
    return diagnostics


def run_train(
    dataset_path: str | Path,
    out_dir: str | Path,
    classes: Sequence[str] | None = None,
    val_ratio: float = DEFAULT_VAL_RATIO,
    learning_rate: float = 1e-2,
    max_epochs: int = 200,
    patience: int = 2,
    batch_size: int = 256,
    seed: int = DEFAULT_SEED,
) -> dict:
    """Split a dataset export, train a head on it, and write model plus history."""
    loaded = dataset.read_dataset(dataset_path, classes=classes, seed=seed)
    train_split, val_split = dataset.split_train_val(loaded, 1.0 - val_ratio, seed)
    dim = loaded.examples[0].vector.shape[0]
    model = dataclasses.replace(
        classifier.init_model(dim, loaded.classes, seed), normalized_inputs=True
    )
    config = classifier.TrainConfig(
        learning_rate=learning_rate,
        max_epochs=max_epochs,
        patience=patience,
        batch_size=batch_size,
        seed=seed,
    )
    trained, history = classifier.train(model, train_split, val_split, config)
    best = min(history, key=lambda s: s.val_loss)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    classifier.save_model(trained, out_dir / MODEL_FILE)
    _write_json(
        out_dir / HISTORY_FILE,
        {
            "config": dataclasses.asdict(config),
            "classes": list(loaded.classes),
            "val_ratio": val_ratio,
            "epochs": [dataclasses.asdict(s) for s in history],
            "best_epoch": best.epoch,
            "best_val_loss": best.val_loss,
        },
    )
    return {
        "model_file": MODEL_FILE,
        "epochs": len(history),
        "best_epoch": best.epoch,
        "best_val_loss": best.val_loss,
        "train_examples": len(train_split.examples),
        "val_examples": len(val_split.examples),
    }


def _versioned_name(name: str, n: int) -> str:
    stem, dot, suffix = name.partition(".")
    return f"{stem}.v{n}{dot}{suffix}"


def _archive_outputs(out_dir: Path) -> int | None:
    """Rename existing pipeline outputs to the next free .vN names."""
    names = [DATASET_FILE, DIAGNOSTICS_FILE, MODEL_FILE, HISTORY_FILE]
    existing = [name for name in names if (out_dir / name).exists()]
    if not existing:
        return None
    n = 1
    while any((out_dir / _versioned_name(name, n)).exists() for name in existing):
        n += 1
    for name in existing:
        (out_dir / name).rename(out_dir / _versioned_name(name, n))
    return n


def run_refine(
    index_dir: str | Path,
    queryset_path: str | Path,
    out_dir: str | Path,
    k: int | None = None,
    strategy: str = "m3",
    seed: int = DEFAULT_SEED,
    val_ratio: float = DEFAULT_VAL_RATIO,
    learning_rate: float = 1e-2,
    max_epochs: int = 200,
    patience: int = 2,
    batch_size: int = 256,
) -> dict:
    """Rebuild negatives with negative queries and retrain; prior outputs are versioned."""
    queryset = dataset.load_queryset(queryset_path)
    if not queryset.negative_queries:
        raise UsageError("refine requires a queryset with negative queries")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    archived = _archive_outputs(out_dir)
    diagnostics = run_build_dataset(
        index_dir, [queryset_path], out_dir, k=k, strategy=strategy, seed=seed
    )
    summary = run_train(
        out_dir / DATASET_FILE,
        out_dir,
        val_ratio=val_ratio,
        learning_rate=learning_rate,
        max_epochs=max_epochs,
        patience=patience,
        batch_size=batch_size,
        seed=seed,
    )
    summary["archived_version"] = archived
    summary["strategy"] = diagnostics["strategy"]
    return summary


def _load_input_matrix(model: classifier.TopicModel, path: str | Path) -> corpus.EmbeddingMatrix:
    matrix = corpus.load_embeddings(path)
    if matrix.dim != model.dim:
        raise DataError(
            f"embedding dim {matrix.dim} from {path} does not match model dim {model.dim}"
        )
    if model.normalized_inputs and not matrix.normalized:
        matrix = corpus.normalize_rows(matrix)
    return matrix


def run_classify(
    model_path: str | Path, embeddings_path: str | Path, out_path: str | Path
) -> int:
    """Write one prediction line (index, label, probability) per embedding row."""
    model = classifier.load_model(model_path)
    matrix = _load_input_matrix(model, embeddings_path)
    predictions = classifier.predict_many(model, matrix.data)
    out_path = Path(out_path)
    with out_path.open("w", encoding="utf-8") as fh:
        for i, (label, prob) in enumerate(predictions):
            fh.write(json.dumps({"index": i, "label": label, "probability": prob}))
            fh.write("\n")
    return len(predictions)


def run_evaluate(
    model_path: str | Path,
    eval_path: str | Path,
    eval_embeddings_path: str | Path,
    out_path: str | Path,
    baselines: Sequence[str] = (),
    queryset_path: str | Path | None = None,
    diagnostics_path: str | Path | None = None,
    seed: int = DEFAULT_SEED,
) -> dict:
    """Score the model and requested baselines on one eval set; write one report."""
    model = classifier.load_model(model_path)
    if not model.is_binary:
        raise UsageError("evaluate requires a binary (two-class) model")
    matrix = _load_input_matrix(model, eval_embeddings_path)
    examples = evaluation.load_eval_examples(eval_path, matrix)
    for name in baselines:
        if name not in BASELINES:
            raise UsageError(f"unknown baseline {name!r}; choose from {BASELINES}")
    queryset = dataset.load_queryset(queryset_path) if queryset_path else None
    if any(b in baselines for b in ("keyword", "dense")) and queryset is None:
        raise UsageError("keyword and dense baselines require --queryset")

    positive_class = model.classes[1]
    model_preds = [
        label == positive_class for label, _ in classifier.predict_many(model, matrix.data)
    ]
    reports = {"model": evaluation.score(model_preds, examples, method="model")}
    dense_threshold = None
    for name in baselines:
        if name == "random":
            preds = evaluation.baseline_random(examples, seed)
        elif name == "keyword":
            preds = evaluation.baseline_keyword(
                examples, [q.text for q in queryset.positive_queries]
            )
        else:
            query_vecs = [q.vector for q in queryset.positive_queries]
            dense_threshold = retrieval.mean_pairwise_cosine(query_vecs)
            preds = evaluation.baseline_dense(examples, query_vecs)
        reports[name] = evaluation.score(preds, examples, method=name)

    report = {
        "examples": len(examples),
        "seed": seed,
        "methods": {name: rep.as_dict() for name, rep in reports.items()},
    }
    if dense_threshold is not None:
        report["dense_threshold"] = dense_threshold
    if diagnostics_path is not None:
        report["config"] = _read_json(Path(diagnostics_path))
    _write_json(Path(out_path), report)
    return report


def run_sweep(
    index_dir: str | Path,
    pool_path: str | Path,
    n_values: Sequence[int],
    k_values: Sequence[int],
    eval_path: str | Path,
    eval_embeddings_path: str | Path,
    out_path: str | Path,
    seed: int = DEFAULT_SEED,
    val_ratio: float = DEFAULT_VAL_RATIO,
    learning_rate: float = 1e-2,
    max_epochs: int = 200,
    patience: int = 2,
    batch_size: int = 256,
) -> dict:
    """Grid over (query count, subspace size): build, train, and score each cell.

    Cell failures are recorded in the output and do not abort the sweep. Each
    cell uses the derived seed `seed + cell_index` (row-major order).
    """
    collection = load_index(index_dir)
    pool = dataset.load_queryset(pool_path)
    eval_matrix = corpus.load_embeddings(eval_embeddings_path)
    if not eval_matrix.normalized:
        eval_matrix = corpus.normalize_rows(eval_matrix)
    examples = evaluation.load_eval_examples(eval_path, eval_matrix)
    rows = collection.embeddings.rows
    cells: list[dict] = []
    table: list[list[float | None]] = [[None] * len(k_values) for _ in n_values]
    cell_index = 0
    for i, n in enumerate(n_values):
        for j, k in enumerate(k_values):
            cell_seed = seed + cell_index
            cell_index += 1
            cell: dict = {"n_queries": n, "k": k, "seed": cell_seed}
            try:
                if n < 2:
                    raise DataError(f"grid cell needs at least 2 queries, got {n}")
                if n > len(pool.positive_queries):
                    raise DataError(
                        f"grid cell needs {n} queries but pool has "
                        f"{len(pool.positive_queries)}"
                    )
                if k < 1:
                    raise DataError(f"grid cell needs k >= 1, got {k}")
                rng = np.random.default_rng(cell_seed)
                picked = sorted(rng.choice(len(pool.positive_queries), n, replace=False))
                queryset = dataset.QuerySet(
                    topic=pool.topic,
                    positive_queries=tuple(pool.positive_queries[p] for p in picked),
                )
                built, diag = _build_binary(
                    collection, queryset, min(k, rows), "m1", cell_seed
                )
                train_split, val_split = dataset.split_train_val(
                    built, 1.0 - val_ratio, cell_seed
                )
                model = dataclasses.replace(
                    classifier.init_model(collection.embeddings.dim, built.classes, cell_seed),
                    normalized_inputs=True,
                )
                config = classifier.TrainConfig(
                    learning_rate=learning_rate,
                    max_epochs=max_epochs,
                    patience=patience,
                    batch_size=batch_size,
                    seed=cell_seed,
                )
                trained, history = classifier.train(model, train_split, val_split, config)
                preds = [
                    label == trained.classes[1]
                    for label, _ in classifier.predict_many(
                        trained, np.stack([e.vector for e in examples])
                    )
                ]
                report = evaluation.score(preds, examples)
                cell.update(
                    {
                        "accuracy": report.accuracy,
                        "f1": report.f1,
                        "threshold": diag["threshold"],
                        "retained_passages": diag["retained_passages"],
                        "epochs": len(history),
                    }
                )
                table[i][j] = report.accuracy
            except (DataError, NumericError) as exc:
                cell["error"] = str(exc)
            cells.append(cell)
    doc = {
        "n_queries": list(n_values),
        "k": list(k_values),
        "seed": seed,
        "accuracy_table": table,
        "cells": cells,
    }
    _write_json(Path(out_path), doc)
    return doc


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_train_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--val-ratio", type=float, default=DEFAULT_VAL_RATIO)
    sub.add_argument("--lr", type=float, default=1e-2)
    sub.add_argument("--max-epochs", type=int, default=200)
    sub.add_argument("--patience", type=int, default=2)
    sub.add_argument("--batch-size", type=int, default=256)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topickit", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("index", help="validate and normalize a corpus")
    sub.add_argument("passages")
    sub.add_argument("embeddings")
    sub.add_argument("--out", required=True)
    sub.add_argument("--force", action="store_true")
    sub.set_defaults(func=_cmd_index)

    sub = commands.add_parser("build-dataset", help="build a labeled dataset from queries")
    sub.add_argument("--index", required=True)
    sub.add_argument("--queryset", action="append", required=True)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--neg-strategy", choices=STRATEGIES, default=None)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_build_dataset)

    sub = commands.add_parser("train", help="train a probability head on a dataset")
    sub.add_argument("--dataset", required=True)
    sub.add_argument("--classes", default=None, help="comma-separated class names")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--out", required=True)
    _add_train_flags(sub)
    sub.set_defaults(func=_cmd_train)

    sub = commands.add_parser("refine", help="rebuild negatives with negative queries and retrain")
    sub.add_argument("--index", required=True)
    sub.add_argument("--queryset", required=True)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--neg-strategy", choices=STRATEGIES, default="m3")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--out", required=True)
    _add_train_flags(sub)
    sub.set_defaults(func=_cmd_refine)

    sub = commands.add_parser("classify", help="predict a label for every embedding row")
    sub.add_argument("--model", required=True)
    sub.add_argument("--embeddings", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_classify)

    sub = commands.add_parser("evaluate", help="score the model and baselines on an eval set")
    sub.add_argument("--model", required=True)
    sub.add_argument("--eval-file", required=True)
    sub.add_argument("--eval-embeddings", required=True)
    sub.add_argument("--queryset", default=None)
    sub.add_argument("--baseline", action="append", choices=BASELINES, default=[])
    sub.add_argument("--diagnostics", default=None, help="diagnostics JSON echoed into the report")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_evaluate)

    sub = commands.add_parser("sweep", help="grid over query counts and subspace sizes")
    sub.add_argument("--index", required=True)
    sub.add_argument("--queryset-pool", required=True)
    sub.add_argument("--n-queries", type=_int_list, required=True)
    sub.add_argument("--k", type=_int_list, required=True)
    sub.add_argument("--eval-file", required=True)
    sub.add_argument("--eval-embeddings", required=True)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--out", required=True)
    _add_train_flags(sub)
    sub.set_defaults(func=_cmd_sweep)

    return parser


def _cmd_index(args: argparse.Namespace) -> int:
    manifest = run_index(args.passages, args.embeddings, args.out, force=args.force)
    print(f"indexed {manifest['rows']} passages (dim {manifest['dim']}) into {args.out}")
    return EXIT_OK


def _cmd_build_dataset(args: argparse.Namespace) -> int:
    diagnostics = run_build_dataset(
        args.index,
        args.queryset,
        args.out,
        k=args.k,
        strategy=args.neg_strategy,
        seed=args.seed,
    )
    note = " (k clamped to corpus size)" if diagnostics["clamped"] else ""
    print(
        f"built {diagnostics['examples']} examples into {args.out}"
        f" [k={diagnostics['k_effective']}{note}]"
    )
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    classes = args.classes.split(",") if args.classes else None
    summary = run_train(
        args.dataset,
        args.out,
        classes=classes,
        val_ratio=args.val_ratio,
        learning_rate=args.lr,
        max_epochs=args.max_epochs,
        patience=args.patience,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    print(
        f"trained for {summary['epochs']} epochs "
        f"(best val loss {summary['best_val_loss']:.6f} at epoch {summary['best_epoch']}); "
        f"model written to {args.out}"
    )
    return EXIT_OK


def _cmd_refine(args: argparse.Namespace) -> int:
    summary = run_refine(
        args.index,
        args.queryset,
        args.out,
        k=args.k,
        strategy=args.neg_strategy,
        seed=args.seed,
        val_ratio=args.val_ratio,
        learning_rate=args.lr,
        max_epochs=args.max_epochs,
        patience=args.patience,
        batch_size=args.batch_size,
    )
    if summary["archived_version"]:
        print(f"previous outputs archived as .v{summary['archived_version']}")
    print(f"refined model written to {args.out} (strategy {summary['strategy']})")
    return EXIT_OK


def _cmd_classify(args: argparse.Namespace) -> int:
    count = run_classify(args.model, args.embeddings, args.out)
    print(f"wrote {count} predictions to {args.out}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    report = run_evaluate(
        args.model,
        args.eval_file,
        args.eval_embeddings,
        args.out,
        baselines=args.baseline,
        queryset_path=args.queryset,
        diagnostics_path=args.diagnostics,
        seed=args.seed,
    )
    for name, method in report["methods"].items():
        print(f"{name}: f1={method['f1']:.4f} accuracy={method['accuracy']:.4f}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    doc = run_sweep(
        args.index,
        args.queryset_pool,
        args.n_queries,
        args.k,
        args.eval_file,
        args.eval_embeddings,
        args.out,
        seed=args.seed,
        val_ratio=args.val_ratio,
        learning_rate=args.lr,
        max_epochs=args.max_epochs,
        patience=args.patience,
        batch_size=args.batch_size,
    )
    failures = sum(1 for cell in doc["cells"] if "error" in cell)
    print(f"swept {len(doc['cells'])} cells ({failures} failed) into {args.out}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
