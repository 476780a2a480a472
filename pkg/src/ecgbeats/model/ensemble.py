"""Fitted-model container and prediction for both ensemble kinds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


def softmax(raw: np.ndarray) -> np.ndarray:
    shifted = raw - raw.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class EnsembleModel:
    """A trained forest or boosted-tree multiclass classifier.

    For ``kind == 'gbdt'`` the trees are stored round-major, class-minor:
    tree t belongs to boosting round t // n_classes, class t % n_classes,
    and leaf values are already learning-rate scaled. ``train_logloss``
    (GBDT only) records the training multiclass logloss after each round.
    """

    kind: str                     # "gbdt" | "rf"
    n_classes: int
    n_features: int
    trees: list
    n_rounds: int = 0             # gbdt only
    base_score: np.ndarray | None = None
    train_logloss: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.kind not in ("gbdt", "rf"):
            raise ValidationError(f"unknown model kind {self.kind!r}")
        if self.kind == "gbdt":
            if self.base_score is None:
                self.base_score = np.zeros(self.n_classes)
            if len(self.trees) != self.n_rounds * self.n_classes:
                raise ValidationError(
                    f"gbdt expects n_rounds*K = {self.n_rounds * self.n_classes} "
                    f"trees, got {len(self.trees)}"
                )


def _check_rows(model: EnsembleModel, rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != model.n_features:
        raise ValidationError(
            f"row has {rows.shape[1]} features, model expects {model.n_features}"
        )
    return rows


def predict_proba(model: EnsembleModel, rows) -> np.ndarray:
    """Class-probability matrix, one row per input row."""
    x = _check_rows(model, rows)
    k = model.n_classes
    if model.kind == "gbdt":
        raw = np.tile(model.base_score, (x.shape[0], 1))
        for t, tree in enumerate(model.trees):
            raw[:, t % k] += tree.predict_value(x)
        return softmax(raw)
    probs = np.zeros((x.shape[0], k))
    for tree in model.trees:
        counts = tree.predict_counts(x).astype(float)
        probs += counts / counts.sum(axis=1, keepdims=True)
    return probs / len(model.trees)


def predict_batch(model: EnsembleModel, rows):
    """(class ids, probability matrix) for many rows; argmax ties go low."""
    probs = predict_proba(model, rows)
    return np.argmax(probs, axis=1), probs


def predict(model: EnsembleModel, row):
    """(class id, probability vector) for a single row."""
    ids, probs = predict_batch(model, np.atleast_2d(row))
    return int(ids[0]), probs[0]
