"""Gradient-boosted trees with the softmax multiclass logloss objective.

Per boosting round, one regression tree per class is fit to the first- and
second-order derivatives of the logloss taken at the scores from the start
of the round: g_ik = p_ik - y_ik, h_ik = p_ik * (1 - p_ik). Split search is
exact greedy (sorted scan over midpoints of distinct values) maximizing the
usual second-order gain

    G_L^2 / (H_L + lambda) + G_R^2 / (H_R + lambda) - G^2 / (H + lambda)

and leaf values are L1-soft-thresholded Newton steps scaled by the learning
rate. Trees grow depth-wise; no histogram binning, no feature subsampling.
Deterministic given the input order, so models are byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .ensemble import EnsembleModel, softmax
from .tree import Tree, TreeBuilder


@dataclass
class GbdtParams:
    """Defaults are the best configuration reported for this task."""

    learning_rate: float = 0.5
    max_depth: int = 10
    n_estimators: int = 1000
    min_data_in_leaf: int = 10
    l1_alpha: float = 0.5
    l2_lambda: float = 0.7327
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_depth < 1:
            raise ValidationError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_data_in_leaf < 1:
            raise ValidationError(f"min_data_in_leaf must be >= 1, got {self.min_data_in_leaf}")
        if self.n_estimators < 0:
            raise ValidationError(f"n_estimators must be >= 0, got {self.n_estimators}")
        if self.l1_alpha < 0 or self.l2_lambda < 0:
            raise ValidationError("regularization strengths must be >= 0")


def _gain_term(g_sum: np.ndarray, den: np.ndarray) -> np.ndarray:
    """G^2 / den with 0 where den <= 0 (only reachable when lambda == 0)."""
    return np.where(den > 0, g_sum * g_sum / np.where(den > 0, den, 1.0), 0.0)


def _best_split(x_node, g_node, h_node, lam, min_leaf):
    """Best (gain, feature, threshold) for one node, or None.

    Candidates are midpoints of consecutive distinct sorted values. Ties
    resolve to the lowest feature index, then the lowest threshold: argmax
    returns the first maximum, columns are scanned in feature order and rows
    in ascending threshold order.
    """
    n = x_node.shape[0]
    if n < 2 * min_leaf:
        return None
    g_total, h_total = g_node.sum(), h_node.sum()
    parent = float(_gain_term(np.asarray(g_total), np.asarray(h_total + lam)))

    order = np.argsort(x_node, axis=0, kind="stable")
    xs = np.take_along_axis(x_node, order, axis=0)
    gl = np.cumsum(g_node[order], axis=0)[:-1]
    hl = np.cumsum(h_node[order], axis=0)[:-1]
    gains = _gain_term(gl, hl + lam) + _gain_term(g_total - gl, h_total - hl + lam) - parent

    n_left = np.arange(1, n)[:, None]
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
    gains = np.where(valid, gains, -np.inf)

    per_feature = gains.max(axis=0)
    feature = int(np.argmax(per_feature))
    gain = per_feature[feature]
    if not np.isfinite(gain) or gain <= 0.0:
        return None
    row = int(np.argmax(gains[:, feature]))
    threshold = 0.5 * (xs[row, feature] + xs[row + 1, feature])
    return float(gain), feature, float(threshold)


def _leaf_value(g_sum, h_sum, params: GbdtParams) -> float:
    den = h_sum + params.l2_lambda
    if den <= 0:
        return 0.0
    mag = max(abs(g_sum) - params.l1_alpha, 0.0)
    return float(-np.sign(g_sum) * mag / den * params.learning_rate)


def _build_tree(x, g, h, params: GbdtParams) -> Tree:
    builder = TreeBuilder()
    stack = [(builder.add_node(), np.arange(x.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        split = None
        if depth < params.max_depth:
            split = _best_split(x[idx], g[idx], h[idx],
                                params.l2_lambda, params.min_data_in_leaf)
        if split is None:
            builder.set_leaf_value(node, _leaf_value(g[idx].sum(), h[idx].sum(), params))
            continue
        _, feature, threshold = split
        go_left = x[idx, feature] <= threshold
        left, right = builder.add_node(), builder.add_node()
        builder.set_split(node, feature, threshold, left, right)
        stack.append((right, idx[~go_left], depth + 1))
        stack.append((left, idx[go_left], depth + 1))
    return builder.build()


def fit_gbdt(rows, labels, params: GbdtParams = GbdtParams(),
             n_classes: int | None = None) -> EnsembleModel:
    """Fit the boosted ensemble; scores start at 0 for every class."""
    x = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=int)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValidationError("rows must be 2-D with one label per row")
    if not np.all(np.isfinite(x)):
        raise ValidationError("feature matrix contains non-finite values")
    present = np.unique(y)
    if present.shape[0] < 2:
        raise ValidationError("training data contains a single class")
    k = int(n_classes) if n_classes is not None else int(present.max()) + 1
    if present.min() < 0 or present.max() >= k:
        raise ValidationError(f"labels outside 0..{k - 1}")

    onehot = np.zeros((x.shape[0], k))
    onehot[np.arange(x.shape[0]), y] = 1.0
    scores = np.zeros((x.shape[0], k))
    trees, logloss = [], []
    for _ in range(params.n_estimators):
        probs = softmax(scores)
        # all K trees of a round use derivatives at the round-start scores
        for cls in range(k):
            g = probs[:, cls] - onehot[:, cls]
            h = probs[:, cls] * (1.0 - probs[:, cls])
            tree = _build_tree(x, g, h, params)
            scores[:, cls] += tree.predict_value(x)
            trees.append(tree)
        probs = softmax(scores)
        logloss.append(float(-np.mean(np.log(probs[np.arange(x.shape[0]), y]))))

    model = EnsembleModel(kind="gbdt", n_classes=k, n_features=x.shape[1],
                          trees=trees, n_rounds=params.n_estimators)
    model.train_logloss = logloss
    return model
