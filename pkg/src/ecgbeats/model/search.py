"""Grid search over stratified K-fold cross-validation, scored by macro F1.

Folds are stratified per class: each class's indices are shuffled with the
seeded generator and dealt round-robin, so fold class counts stay within one
sample of proportional. When a balance plan is given it is applied to the
training split of each fold only; validation folds are never resampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..balance import BalancePlan, apply_plan
from ..errors import ValidationError
from ..metrics import confusion_matrix, macro_metrics
from .ensemble import predict_batch
from .forest import RfParams, fit_random_forest
from .gbdt import GbdtParams, fit_gbdt


def stratified_kfold(labels, folds: int, seed: int = 0) -> list:
    """Index arrays for each fold, class-stratified within one sample."""
    y = np.asarray(labels, dtype=int)
    if folds < 2:
        raise ValidationError(f"need at least 2 folds, got {folds}")
    rng = np.random.default_rng(seed)
    assignments = [[] for _ in range(folds)]
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.shape[0] < folds:
            raise ValidationError(
                f"class {cls} has {idx.shape[0]} samples; needs >= {folds}"
            )
        rng.shuffle(idx)
        for pos, sample in enumerate(idx):
            assignments[pos % folds].append(sample)
    return [np.sort(np.asarray(fold, dtype=int)) for fold in assignments]


def stratified_split(labels, test_fraction: float, seed: int = 0):
    """One seeded stratified train/test split; returns (train_idx, test_idx).

    Each class contributes round(test_fraction * count) samples to the test
    side, so class proportions carry over. Must run before any balancing.
    """
    y = np.asarray(labels, dtype=int)
    if not 0 < test_fraction < 1:
        raise ValidationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        n_test = int(round(test_fraction * idx.shape[0]))
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return np.sort(np.asarray(train, dtype=int)), np.sort(np.asarray(test, dtype=int))


def _fit(rows, labels, params, n_classes):
    if isinstance(params, GbdtParams):
        return fit_gbdt(rows, labels, params, n_classes=n_classes)
    if isinstance(params, RfParams):
        return fit_random_forest(rows, labels, params, n_classes=n_classes)
    raise ValidationError(f"unsupported parameter type {type(params).__name__}")


@dataclass
class GridResult:
    index: int
    params: object
    fold_f1: list
    mean_f1: float


def grid_search(rows, labels, candidates, folds: int = 3, seed: int = 0,
                balance_plan: BalancePlan | None = None):
    """Evaluate every candidate, return (best_params, results).

    Best is the highest mean macro F1 over folds; ties go to the earliest
    candidate in grid order.
    """
    rows = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=int)
    if not candidates:
        raise ValidationError("empty parameter grid")
    n_classes = int(y.max()) + 1
    fold_idx = stratified_kfold(y, folds, seed)
    all_idx = np.arange(y.shape[0])

    results = []
    for index, params in enumerate(candidates):
        scores = []
        for valid_idx in fold_idx:
            train_mask = np.ones(y.shape[0], dtype=bool)
            train_mask[valid_idx] = False
            train_idx = all_idx[train_mask]
            x_train, y_train = rows[train_idx], y[train_idx]
            if balance_plan is not None:
                x_train, y_train = apply_plan(x_train, y_train, balance_plan)
            model = _fit(x_train, y_train, params, n_classes)
            pred, _ = predict_batch(model, rows[valid_idx])
            _, _, f1, _ = macro_metrics(confusion_matrix(y[valid_idx], pred, n_classes))
            scores.append(f1)
        results.append(GridResult(index=index, params=params,
                                  fold_f1=scores, mean_f1=float(np.mean(scores))))
    best = max(results, key=lambda r: (r.mean_f1, -r.index))
    return best.params, results
