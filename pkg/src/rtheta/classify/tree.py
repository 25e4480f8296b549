"""CART decision trees with Gini impurity.

Split search is exhaustive over midpoints between consecutive distinct
feature values.  Ties in impurity (within ``TIE_TOLERANCE``) go to the
lowest feature index, then the lowest threshold, so training is a
deterministic function of the data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from rtheta.errors import DegenerateLabels

TIE_TOLERANCE = 1e-12


@dataclass
class Node:
    """Internal node when ``feature >= 0``; otherwise a leaf.

    ``counts`` holds (negatives, positives) for classification trees and
    ``value`` the leaf weight for regression trees used by boosting.
    """

    feature: int = -1
    threshold: float = 0.0
    left: Optional["Node"] = None
    right: Optional["Node"] = None
    counts: tuple[int, int] = (0, 0)
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_leaves(self) -> int:
        return 1 if self.is_leaf else self.left.n_leaves() + self.right.n_leaves()

    def to_dict(self) -> dict:
        counts = [int(c) for c in self.counts]
        if self.is_leaf:
            return {"counts": counts, "value": float(self.value)}
        return {
            "feature": int(self.feature),
            "threshold": float(self.threshold),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "counts": counts,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        counts = tuple(int(c) for c in d.get("counts", (0, 0)))
        if "feature" not in d:
            return cls(counts=counts, value=float(d.get("value", 0.0)))
        return cls(
            feature=int(d["feature"]),
            threshold=float(d["threshold"]),
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
            counts=counts,
        )


def leaf_for(X: np.ndarray, node: Node) -> Node:
    while not node.is_leaf:
        node = node.left if X[node.feature] <= node.threshold else node.right
    return node


def route(X: np.ndarray, root: Node):
    """Yield ``(row_indices, leaf)`` for every leaf reached by rows of X."""
    stack = [(np.arange(len(X)), root)]
    while stack:
        idx, node = stack.pop()
        if node.is_leaf:
            yield idx, node
            continue
        go_left = X[idx, node.feature] <= node.threshold
        stack.append((idx[~go_left], node.right))
        stack.append((idx[go_left], node.left))


def leaf_values(X: np.ndarray, root: Node) -> np.ndarray:
    out = np.empty(len(X))
    for idx, leaf in route(X, root):
        out[idx] = leaf.value
    return out


def leaf_counts(X: np.ndarray, root: Node) -> np.ndarray:
    """(rows, 2) array of the (negative, positive) counts of each row's leaf."""
    out = np.empty((len(X), 2))
    for idx, leaf in route(X, root):
        out[idx] = leaf.counts
    return out


def midpoint(a, b):
    """Midpoint of a < b that stays strictly below b (works elementwise)."""
    mid = (np.asarray(a, dtype=float) + b) / 2.0
    # adjacent doubles can round the midpoint up onto b
    out = np.where(mid >= b, a, mid)
    return float(out) if out.ndim == 0 else out


def split_candidates(values: np.ndarray, min_leaf: int = 1):
    """Sort order and valid cut positions for one feature.

    Returns ``(order, cuts, thresholds)`` where a cut at position ``i``
    sends ``order[:i + 1]`` left.
    """
    order = np.argsort(values, kind="stable")
    xs = values[order]
    n = len(xs)
    cuts = np.nonzero(xs[:-1] != xs[1:])[0]
    left_sizes = cuts + 1
    keep = (left_sizes >= min_leaf) & (n - left_sizes >= min_leaf)
    cuts = cuts[keep]
    thresholds = midpoint(xs[cuts], xs[cuts + 1])
    return order, cuts, thresholds


def pick(scores_by_feature, minimize: bool = True):
    """Apply the tie rule to per-feature (thresholds, scores) arrays.

    Returns ``(feature, threshold, score)`` or None when nothing is valid.
    """
    best = None
    for f, (thresholds, scores) in scores_by_feature:
        if len(scores):
            s = scores.min() if minimize else scores.max()
            if best is None or (s < best if minimize else s > best):
                best = s
    if best is None:
        return None
    for f, (thresholds, scores) in scores_by_feature:
        if not len(scores):
            continue
        ok = scores <= best + TIE_TOLERANCE if minimize else scores >= best - TIE_TOLERANCE
        if ok.any():
            i = int(np.argmax(ok))
            return f, float(thresholds[i]), float(scores[i])
    return None


def gini_scores(y_sorted: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    """Size-weighted child Gini impurity for each cut of a sorted label vector."""
    n = len(y_sorted)
    pos_left = np.cumsum(y_sorted)[cuts].astype(float)
    n_left = (cuts + 1).astype(float)
    n_right = n - n_left
    pos_right = y_sorted.sum() - pos_left
    gl = 2.0 * pos_left * (n_left - pos_left) / n_left
    gr = 2.0 * pos_right * (n_right - pos_right) / n_right
    return (gl + gr) / n


def gini(y: np.ndarray) -> float:
    if len(y) == 0:
        return 0.0
    p = float(np.mean(y))
    return 2.0 * p * (1.0 - p)


@dataclass
class TreeModel:
    root: Node
    n_features: int
    degenerate: bool = False

    def predict_proba(self, X) -> np.ndarray:
        c = leaf_counts(np.atleast_2d(np.asarray(X, dtype=float)), self.root)
        total = c.sum(axis=1)
        return np.divide(c[:, 1], total, out=np.zeros(len(c)), where=total > 0)

    def predict(self, X) -> np.ndarray:
        c = leaf_counts(np.atleast_2d(np.asarray(X, dtype=float)), self.root)
        return (c[:, 1] > c[:, 0]).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": "tree",
            "n_features": self.n_features,
            "degenerate": self.degenerate,
            "root": self.root.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeModel":
        return cls(Node.from_dict(d["root"]), int(d["n_features"]), bool(d.get("degenerate", False)))


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"X must be 2-D with one row per label, got {X.shape} and {y.shape}")
    if len(y) == 0:
        raise ValueError("cannot train on zero rows")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return X, y


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int = 16,
    min_samples_leaf: int = 1,
    feature_sampler=None,
) -> Node:
    """Recursive CART growth on already validated arrays.

    ``feature_sampler`` returns the feature indices to consider at each
    node (all features when None); random forests pass a seeded sampler.
    """

    def build(idx: np.ndarray, depth: int) -> Node:
        yy = y[idx]
        pos = int(yy.sum())
        counts = (len(idx) - pos, pos)
        if pos == 0 or pos == len(idx) or depth >= max_depth or len(idx) < 2 * min_samples_leaf:
            return Node(counts=counts)
        features = range(X.shape[1]) if feature_sampler is None else feature_sampler()
        per_feature = []
        for f in features:
            order, cuts, thresholds = split_candidates(X[idx, f], min_samples_leaf)
            scores = gini_scores(yy[order], cuts) if len(cuts) else np.empty(0)
            per_feature.append((f, (thresholds, scores)))
        choice = pick(per_feature, minimize=True)
        if choice is None:
            return Node(counts=counts)
        f, thr, _ = choice
        go_left = X[idx, f] <= thr
        return Node(
            feature=f,
            threshold=thr,
            left=build(idx[go_left], depth + 1),
            right=build(idx[~go_left], depth + 1),
            counts=counts,
        )

    return build(np.arange(len(y)), 0)


def train_tree(X, y, max_depth: int = 16, min_samples_leaf: int = 1) -> TreeModel:
    """Greedy CART classifier.

    A single-class ``y`` yields a one-leaf model flagged ``degenerate``
    and a :class:`DegenerateLabels` warning.
    """
    X, y = _check_xy(X, y)
    if y.min() == y.max():
        warnings.warn(DegenerateLabels(f"only class {int(y[0])} present"), stacklevel=2)
        return TreeModel(Node(counts=(int((y == 0).sum()), int(y.sum()))), X.shape[1], True)
    root = grow_tree(X, y, max_depth=max_depth, min_samples_leaf=min_samples_leaf)
    return TreeModel(root, X.shape[1])
