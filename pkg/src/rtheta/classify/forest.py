"""Bagged random forests of CART trees."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from rtheta.classify.tree import Node, _check_xy, grow_tree, leaf_counts
from rtheta.errors import DegenerateLabels


@dataclass
class ForestModel:
    trees: list[Node]
    seeds: list[int]
    feature_subsample: int
    n_features: int
    degenerate: bool = False
    params: dict = field(default_factory=dict)

    def votes(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        v = np.zeros(len(X))
        for tree in self.trees:
            c = leaf_counts(X, tree)
            v += c[:, 1] > c[:, 0]
        return v

    def predict_proba(self, X) -> np.ndarray:
        """Share of trees voting positive."""
        return self.votes(X) / len(self.trees)

    def predict(self, X) -> np.ndarray:
        # strict majority; an even split votes negative
        return (self.votes(X) * 2 > len(self.trees)).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": "forest",
            "n_features": self.n_features,
            "feature_subsample": self.feature_subsample,
            "seeds": self.seeds,
            "degenerate": self.degenerate,
            "params": self.params,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(
            [Node.from_dict(t) for t in d["trees"]],
            [int(s) for s in d["seeds"]],
            int(d["feature_subsample"]),
            int(d["n_features"]),
            bool(d.get("degenerate", False)),
            dict(d.get("params", {})),
        )


def train_forest(
    X,
    y,
    n_trees: int = 100,
    feature_subsample=None,
    bootstrap: bool = True,
    seed: int = 0,
    max_depth: int = 16,
    min_samples_leaf: int = 1,
) -> ForestModel:
    """Random forest: bootstrap rows per tree, random feature subset per node.

    ``feature_subsample`` defaults to ``ceil(sqrt(n_features))``.  Each tree
    draws from its own generator seeded from ``seed``, so the model is a
    deterministic function of the data and the seed.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    k = math.ceil(math.sqrt(p)) if feature_subsample is None else int(feature_subsample)
    if not 1 <= k <= p:
        raise ValueError(f"feature_subsample must be in [1, {p}], got {k}")
    params = dict(
        n_trees=n_trees, bootstrap=bootstrap, seed=seed, max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(n_trees)]
    if y.min() == y.max():
        warnings.warn(DegenerateLabels(f"only class {int(y[0])} present"), stacklevel=2)
        leaf = Node(counts=(int((y == 0).sum()), int(y.sum())))
        return ForestModel([leaf] * n_trees, seeds, k, p, True, params)
    trees = []
    for s in seeds:
        rng = np.random.default_rng(s)
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
        if k == p:
            sampler = None
        else:
            def sampler(rng=rng):
                return np.sort(rng.choice(p, size=k, replace=False))
        trees.append(
            grow_tree(X[rows], y[rows], max_depth=max_depth, min_samples_leaf=min_samples_leaf,
                      feature_sampler=sampler)
        )
    return ForestModel(trees, seeds, k, p, False, params)
