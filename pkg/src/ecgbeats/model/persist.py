"""Versioned plain-text model files.

Grammar (one record per line, whitespace separated):

    ecgbeats-model 1
    kind <gbdt|rf>
    n_classes <K>
    n_features <F>
    n_rounds <R>                      # gbdt only
    n_trees <T>
    tree <t> nodes <M>                # repeated T times, t ascending
    n <i> split <feature> <threshold> <left> <right>
    n <i> leaf <value>                # gbdt leaf
    n <i> leaf <c0> ... <cK-1>        # rf leaf (class counts)
    end

Thresholds and leaf values are written with repr(), which round-trips
float64 exactly, so a loaded model predicts bit-identically. GBDT trees are
stored in their round-major, class-minor training order.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .ensemble import EnsembleModel
from .tree import LEAF, Tree

FORMAT_NAME = "ecgbeats-model"
FORMAT_VERSION = 1


def save_model(model: EnsembleModel, path) -> None:
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}",
             f"kind {model.kind}",
             f"n_classes {model.n_classes}",
             f"n_features {model.n_features}"]
    if model.kind == "gbdt":
        lines.append(f"n_rounds {model.n_rounds}")
    lines.append(f"n_trees {len(model.trees)}")
    for t, tree in enumerate(model.trees):
        lines.append(f"tree {t} nodes {tree.n_nodes}")
        for i in range(tree.n_nodes):
            if tree.feature[i] != LEAF:
                lines.append(
                    f"n {i} split {int(tree.feature[i])} {float(tree.threshold[i])!r} "
                    f"{int(tree.left[i])} {int(tree.right[i])}"
                )
            elif model.kind == "gbdt":
                lines.append(f"n {i} leaf {float(tree.value[i])!r}")
            else:
                counts = " ".join(str(int(c)) for c in tree.counts[i])
                lines.append(f"n {i} leaf {counts}")
    lines.append("end")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


class _LineReader:
    def __init__(self, path):
        with open(path) as fh:
            self.lines = [ln.rstrip("\n") for ln in fh]
        self.path = path
        self.pos = 0

    def next(self) -> list:
        while self.pos < len(self.lines):
            line = self.lines[self.pos]
            self.pos += 1
            if line.strip():
                return line.split()
        raise DataError(f"{self.path}: truncated model file")

    def expect(self, key: str) -> list:
        parts = self.next()
        if parts[0] != key:
            raise DataError(f"{self.path}: expected '{key}', found '{parts[0]}'")
        return parts[1:]


def load_model(path) -> EnsembleModel:
    reader = _LineReader(path)
    header = reader.next()
    if header[0] != FORMAT_NAME:
        raise DataError(f"{path}: not an {FORMAT_NAME} file")
    if int(header[1]) != FORMAT_VERSION:
        raise DataError(
            f"{path}: format version {header[1]} unsupported (expected {FORMAT_VERSION})"
        )
    kind = reader.expect("kind")[0]
    if kind not in ("gbdt", "rf"):
        raise DataError(f"{path}: unknown model kind {kind!r}")
    n_classes = int(reader.expect("n_classes")[0])
    n_features = int(reader.expect("n_features")[0])
    n_rounds = int(reader.expect("n_rounds")[0]) if kind == "gbdt" else 0
    n_trees = int(reader.expect("n_trees")[0])

    trees = []
    for t in range(n_trees):
        t_id, _, n_nodes = reader.expect("tree")
        if int(t_id) != t:
            raise DataError(f"{path}: tree records out of order")
        n_nodes = int(n_nodes)
        feature = np.full(n_nodes, LEAF, dtype=np.int32)
        threshold = np.zeros(n_nodes)
        left = np.full(n_nodes, LEAF, dtype=np.int32)
        right = np.full(n_nodes, LEAF, dtype=np.int32)
        value = np.zeros(n_nodes) if kind == "gbdt" else None
        counts = np.zeros((n_nodes, n_classes), dtype=np.int64) if kind == "rf" else None
        for _ in range(n_nodes):
            parts = reader.expect("n")
            i, node_kind = int(parts[0]), parts[1]
            if not 0 <= i < n_nodes:
                raise DataError(f"{path}: node id {i} out of range")
            if node_kind == "split":
                feature[i] = int(parts[2])
                threshold[i] = float(parts[3])
                left[i] = int(parts[4])
                right[i] = int(parts[5])
            elif node_kind == "leaf":
                if kind == "gbdt":
                    value[i] = float(parts[2])
                else:
                    if len(parts) != 2 + n_classes:
                        raise DataError(f"{path}: leaf histogram should have {n_classes} counts")
                    counts[i] = [int(c) for c in parts[2:]]
            else:
                raise DataError(f"{path}: unknown node kind {node_kind!r}")
        trees.append(Tree(feature=feature, threshold=threshold, left=left,
                          right=right, value=value, counts=counts))
    if reader.next() != ["end"]:
        raise DataError(f"{path}: missing end marker")
    return EnsembleModel(kind=kind, n_classes=n_classes, n_features=n_features,
                         trees=trees, n_rounds=n_rounds)
