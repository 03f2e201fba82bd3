"""Linear probability heads over embedding vectors.

Two-class models use a single sigmoid output unit; models with more classes
use one softmax unit per class. Training is mini-batch gradient descent on
cross-entropy with a linearly decaying learning rate and early stopping on
validation loss, returning the parameters from the best validation epoch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import LabeledDataset, LabeledExample
from .errors import DataError, NumericError

MODEL_FORMAT_VERSION = 1
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class TopicModel:
    """Linear head: one sigmoid unit for two classes, else one softmax unit per class."""

    weights: np.ndarray  # (units, dim)
    bias: np.ndarray  # (units,)
    classes: tuple[str, ...]
    dim: int
    trained_epochs: int = 0
    decision_threshold: float = 0.5
    normalized_inputs: bool = False

    @property
    def is_binary(self) -> bool:
        return self.weights.shape[0] == 1


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent hyperparameters; the learning rate decays linearly to zero."""

    learning_rate: float = 1e-2
    max_epochs: int = 200
    patience: int = 2
    batch_size: int = 256
    seed: int = 1234
    lr_schedule: str = "linear"

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise DataError("max_epochs must be >= 1")
        if self.patience < 1:
            raise DataError("patience must be >= 1")
        if self.batch_size < 1:
            raise DataError("batch_size must be >= 1")
        if self.lr_schedule != "linear":
            raise DataError(f"unsupported lr schedule {self.lr_schedule!r}")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    learning_rate: float


class EarlyStopping:
    """Track the best validation loss; stop after `patience` non-improving epochs."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_loss = math.inf
        self.best_epoch = 0
        self.best_state: tuple[np.ndarray, np.ndarray] | None = None
        self._streak = 0

    def update(self, epoch: int, val_loss: float, state: tuple[np.ndarray, np.ndarray]) -> bool:
        """Record one epoch; returns True when training should halt."""
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.best_state = state
            self._streak = 0
            return False
        self._streak += 1
        return self._streak >= self.patience


def _units_for(classes: Sequence[str]) -> int:
    if len(classes) < 2:
        raise DataError(f"need at least 2 classes, got {len(classes)}")
    return 1 if len(classes) == 2 else len(classes)


def init_model(dim: int, classes: Sequence[str], seed: int) -> TopicModel:
    """Uniform weights in [-1/sqrt(dim), 1/sqrt(dim)], zero bias."""
    if dim < 1:
        raise DataError("dim must be >= 1")
    units = _units_for(classes)
    rng = np.random.default_rng(seed)
    bound = 1.0 / math.sqrt(dim)
    weights = rng.uniform(-bound, bound, size=(units, dim))
    return TopicModel(
        weights=weights, bias=np.zeros(units), classes=tuple(classes), dim=dim
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=-1, keepdims=True)


def _class_probs(weights: np.ndarray, bias: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Probabilities over classes for a batch (n, dim) -> (n, n_classes)."""
    logits = x @ weights.T + bias
    if weights.shape[0] == 1:
        p = _sigmoid(logits[:, 0])
        return np.stack([1.0 - p, p], axis=1)
    return _softmax(logits)


def _check_input(model: TopicModel, x: np.ndarray) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != model.dim:
        raise DataError(
            f"input dim {arr.shape[-1] if arr.ndim else 0} does not match model dim {model.dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise DataError("input vector contains non-finite values")
    return arr


def forward(model: TopicModel, x: Sequence[float] | np.ndarray) -> np.ndarray:
    """Probability vector over model.classes; components sum to 1."""
    arr = _check_input(model, x)
    return _class_probs(model.weights, model.bias, arr[None, :])[0]


def _batch_arrays(
    batch: Sequence[LabeledExample], dim: int, n_classes: int
) -> tuple[np.ndarray, np.ndarray]:
    if not batch:
        raise DataError("batch must be non-empty")
    x = np.stack([np.asarray(e.vector, dtype=np.float64) for e in batch])
    if x.shape[1] != dim:
        raise DataError(f"batch dim {x.shape[1]} does not match model dim {dim}")
    y = np.array([e.label for e in batch], dtype=np.int64)
    if y.min() < 0 or y.max() >= n_classes:
        raise DataError(f"labels out of range for {n_classes} classes")
    return x, y


def _mean_nll(weights: np.ndarray, bias: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    probs = _class_probs(weights, bias, x)
    q = np.clip(probs[np.arange(len(y)), y], PROB_FLOOR, 1.0 - PROB_FLOOR)
    return float(-np.log(q).mean())


def _gradients(
    weights: np.ndarray, bias: np.ndarray, x: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    n = len(y)
    if weights.shape[0] == 1:
        p = _class_probs(weights, bias, x)[:, 1]
        delta = (p - y) / n
        return delta[None, :] @ x, np.array([delta.sum()])
    probs = _class_probs(weights, bias, x)
    probs[np.arange(n), y] -= 1.0
    delta = probs / n
    return delta.T @ x, delta.sum(axis=0)


def loss(model: TopicModel, batch: Sequence[LabeledExample]) -> float:
    """Mean cross-entropy of the batch, probabilities clamped away from 0 and 1."""
    x, y = _batch_arrays(batch, model.dim, len(model.classes))
    return _mean_nll(model.weights, model.bias, x, y)


def grad(model: TopicModel, batch: Sequence[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of `loss` with respect to (weights, bias)."""
    x, y = _batch_arrays(batch, model.dim, len(model.classes))
    return _gradients(model.weights, model.bias, x, y)


def train(
    model: TopicModel,
    train_set: LabeledDataset,
    val_set: LabeledDataset,
    config: TrainConfig,
) -> tuple[TopicModel, list[EpochStats]]:
    """Mini-batch gradient descent with early stopping on validation loss.

    Returns the parameters from the best-validation epoch and the per-epoch
    loss history.
    """
    n_classes = len(model.classes)
    x_train, y_train = _batch_arrays(train_set.examples, model.dim, n_classes)
    x_val, y_val = _batch_arrays(val_set.examples, model.dim, n_classes)
    weights = model.weights.astype(np.float64).copy()
    bias = model.bias.astype(np.float64).copy()
    rng = np.random.default_rng(config.seed)
    stopper = EarlyStopping(config.patience)
    history: list[EpochStats] = []
    n = len(y_train)
    for epoch in range(1, config.max_epochs + 1):
        lr = config.learning_rate * (1.0 - (epoch - 1) / config.max_epochs)
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            grad_w, grad_b = _gradients(weights, bias, x_train[idx], y_train[idx])
            weights -= lr * grad_w
            bias -= lr * grad_b
        train_loss = _mean_nll(weights, bias, x_train, y_train)
        val_loss = _mean_nll(weights, bias, x_val, y_val)
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            raise NumericError(f"non-finite loss at epoch {epoch}")
        history.append(EpochStats(epoch, train_loss, val_loss, lr))
        if stopper.update(epoch, val_loss, (weights.copy(), bias.copy())):
            break
    assert stopper.best_state is not None
    best_weights, best_bias = stopper.best_state
    trained = TopicModel(
        weights=best_weights,
        bias=best_bias,
        classes=model.classes,
        dim=model.dim,
        trained_epochs=len(history),
        decision_threshold=model.decision_threshold,
        normalized_inputs=model.normalized_inputs,
    )
    return trained, history


def predict(model: TopicModel, x: Sequence[float] | np.ndarray) -> tuple[str, float]:
    """Predicted class name and its probability.

    Binary models predict the positive class when its probability meets the
    decision threshold inclusively; multi-class ties go to the lowest index.
    """
    probs = forward(model, x)
    if model.is_binary:
        index = 1 if probs[1] >= model.decision_threshold else 0
    else:
        index = int(np.argmax(probs))
    return model.classes[index], float(probs[index])


def predict_many(model: TopicModel, vectors: np.ndarray) -> list[tuple[str, float]]:
    """Vectorized predict over the rows of a matrix."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != model.dim:
        shape = arr.shape[1] if arr.ndim == 2 else arr.shape
        raise DataError(f"input dim {shape} does not match model dim {model.dim}")
    if not np.all(np.isfinite(arr)):
        raise DataError("input matrix contains non-finite values")
    probs = _class_probs(model.weights, model.bias, arr)
    if model.is_binary:
        picks = (probs[:, 1] >= model.decision_threshold).astype(np.int64)
    else:
        picks = probs.argmax(axis=1)
    return [(model.classes[i], float(probs[row, i])) for row, i in enumerate(picks)]


def save_model(model: TopicModel, path: str | Path) -> None:
    """Persist the model as JSON; load_model round-trips all fields exactly."""
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "classes": list(model.classes),
        "dim": model.dim,
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "decision_threshold": model.decision_threshold,
        "normalized_inputs": model.normalized_inputs,
        "trained_epochs": model.trained_epochs,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TopicModel:
    """Load a model file, validating version and parameter shapes."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DataError(f"{path}: expected a JSON object")
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise DataError(f"{path}: unsupported model version {version!r}")
    try:
        classes = tuple(str(c) for c in doc["classes"])
        dim = int(doc["dim"])
        weights = np.asarray(doc["weights"], dtype=np.float64)
        bias = np.asarray(doc["bias"], dtype=np.float64)
        threshold = float(doc["decision_threshold"])
        normalized_inputs = bool(doc["normalized_inputs"])
        trained_epochs = int(doc["trained_epochs"])
    except (KeyError, TypeError) as exc:
        raise DataError(f"{path}: malformed model file: {exc}") from exc
    units = _units_for(classes)
    if weights.shape != (units, dim) or bias.shape != (units,):
        raise DataError(
            f"{path}: parameter shapes {weights.shape}/{bias.shape} do not match "
            f"{units} units x {dim} dims"
        )
    if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
        raise DataError(f"{path}: parameters contain non-finite values")
    return TopicModel(
        weights=weights,
        bias=bias,
        classes=classes,
        dim=dim,
        trained_epochs=trained_epochs,
        decision_threshold=threshold,
        normalized_inputs=normalized_inputs,
    )
