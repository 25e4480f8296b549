"""Gradient-boosted regression trees for the logistic loss.

Each round fits a depth-limited tree to the first and second derivatives
of the loss at the current scores.  A split is scored by

    gain = 1/2 * [G_L^2 / (H_L + lambda) + G_R^2 / (H_R + lambda) - G^2 / (H + lambda)]

and a leaf holding gradient sum G and hessian sum H gets weight
``-G / (H + lambda)``.  Scores start at zero (probability 1/2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from rtheta.classify.tree import TIE_TOLERANCE, Node, _check_xy, leaf_values, midpoint
from rtheta.errors import DegenerateLabels


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.asarray(z, dtype=float)))


def logistic_loss(y, raw) -> float:
    """Mean negative log-likelihood of labels ``y`` at raw scores ``raw``."""
    raw = np.asarray(raw, dtype=float)
    # log(1 + exp(-s)) for y=1 and log(1 + exp(s)) for y=0, computed stably
    signed = np.where(np.asarray(y) == 1, -raw, raw)
    return float(np.mean(np.logaddexp(0.0, signed)))


def split_gain(GL, HL, GR, HR, lam):
    G, H = GL + GR, HL + HR
    return 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam))


def leaf_weight(G, H, lam) -> float:
    return -G / (H + lam)


def best_split(Xn, gn, hn, lam: float, min_child_weight: float = 0.0):
    """Max-gain (feature, threshold, gain) for one node, or None.

    All features are scored at once; ties follow the tree rule (lowest
    feature, then lowest threshold).
    """
    if len(gn) < 2:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    GL = np.cumsum(gn[order], axis=0)[:-1]
    HL = np.cumsum(hn[order], axis=0)[:-1]
    G, H = gn.sum(), hn.sum()
    GR, HR = G - GL, H - HL
    valid = (xs[:-1] != xs[1:]) & (HL >= min_child_weight) & (HR >= min_child_weight)
    if not valid.any():
        return None
    gains = np.where(valid, split_gain(GL, HL, GR, HR, lam), -np.inf)
    best = gains.max()
    near = gains >= best - TIE_TOLERANCE
    f = int(np.argmax(near.any(axis=0)))
    i = int(np.argmax(near[:, f]))
    return f, midpoint(xs[i, f], xs[i + 1, f]), float(gains[i, f])


def grow_regression_tree(X, g, h, max_depth: int, lam: float, min_child_weight: float = 0.0) -> Node:
    def build(idx, depth):
        G, H = float(g[idx].sum()), float(h[idx].sum())
        leaf = Node(value=leaf_weight(G, H, lam), counts=(len(idx), 0))
        if depth >= max_depth:
            return leaf
        choice = best_split(X[idx], g[idx], h[idx], lam, min_child_weight)
        if choice is None or choice[2] <= 0:
            return leaf
        f, thr, _ = choice
        go_left = X[idx, f] <= thr
        return Node(
            feature=f,
            threshold=thr,
            left=build(idx[go_left], depth + 1),
            right=build(idx[~go_left], depth + 1),
            counts=(len(idx), 0),
        )

    return build(np.arange(len(g)), 0)


@dataclass
class BoostedModel:
    trees: list[Node]
    learning_rate: float
    lam: float
    n_features: int
    base_score: float = 0.0
    degenerate: bool = False
    params: dict = field(default_factory=dict)
    loss_history: list[float] = field(default_factory=list)

    def decision_function(self, X, rounds=None) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        raw = np.full(len(X), self.base_score)
        for tree in self.trees[:rounds]:
            raw += self.learning_rate * leaf_values(X, tree)
        return raw

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": "boosted",
            "n_features": self.n_features,
            "learning_rate": self.learning_rate,
            "lambda": self.lam,
            "base_score": self.base_score,
            "degenerate": self.degenerate,
            "params": self.params,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostedModel":
        return cls(
            [Node.from_dict(t) for t in d["trees"]],
            float(d["learning_rate"]),
            float(d["lambda"]),
            int(d["n_features"]),
            float(d.get("base_score", 0.0)),
            bool(d.get("degenerate", False)),
            dict(d.get("params", {})),
        )


def train_boosted(
    X,
    y,
    rounds: int = 200,
    depth: int = 6,
    learning_rate: float = 0.1,
    lam: float = 1.0,
    min_child_weight: float = 0.0,
) -> BoostedModel:
    X, y = _check_xy(X, y)
    params = dict(rounds=rounds, depth=depth, learning_rate=learning_rate, lam=lam,
                  min_child_weight=min_child_weight)
    model = BoostedModel([], learning_rate, lam, X.shape[1], params=params)
    if y.min() == y.max():
        warnings.warn(DegenerateLabels(f"only class {int(y[0])} present"), stacklevel=2)
        model.degenerate = True
    raw = np.zeros(len(y))
    model.loss_history.append(logistic_loss(y, raw))
    for _ in range(rounds):
        p = sigmoid(raw)
        g = p - y
        h = p * (1.0 - p)
        tree = grow_regression_tree(X, g, h, depth, lam, min_child_weight)
        model.trees.append(tree)
        raw = raw + learning_rate * leaf_values(X, tree)
        model.loss_history.append(logistic_loss(y, raw))
    return model
