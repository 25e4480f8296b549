"""One-vs-rest multi-label classification over label bit masks."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from rtheta.classify.boosting import BoostedModel, train_boosted
from rtheta.classify.forest import ForestModel, train_forest
from rtheta.classify.tree import Node, TreeModel, train_tree
from rtheta.dataset import mask_matrix
from rtheta.errors import DegenerateLabels, EmptyClass

TRAINERS = {"tree": train_tree, "forest": train_forest, "boosted": train_boosted}
_MODEL_TYPES = {"tree": TreeModel, "forest": ForestModel, "boosted": BoostedModel}


def matrix_to_masks(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.int64)
    return (Y << np.arange(Y.shape[1])).sum(axis=1)


@dataclass
class OneVsRestModel:
    """One independent binary model per class.

    ``flags`` marks classes whose model is constant: ``"empty"`` when the
    class had no positive training row, ``"all-positive"`` when every row
    carried it.
    """

    classes: tuple[str, ...]
    base: str
    models: list
    params: dict = field(default_factory=dict)
    flags: dict[str, str] = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([m.predict_proba(X) for m in self.models])

    def predict_matrix(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([m.predict(X) for m in self.models]).astype(np.int64)

    def predict(self, X) -> np.ndarray:
        """Label masks: the union of the positive per-class decisions."""
        return matrix_to_masks(self.predict_matrix(X))

    def to_dict(self) -> dict:
        return {
            "kind": "one-vs-rest",
            "base": self.base,
            "classes": list(self.classes),
            "params": self.params,
            "flags": self.flags,
            "models": [m.to_dict() for m in self.models],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OneVsRestModel":
        models = [_MODEL_TYPES[m["kind"]].from_dict(m) for m in d["models"]]
        return cls(tuple(d["classes"]), d["base"], models, dict(d.get("params", {})),
                   dict(d.get("flags", {})))


def train_multilabel(
    X,
    masks,
    classes: Sequence[str],
    base: str = "tree",
    params: Optional[dict] = None,
) -> OneVsRestModel:
    """Fit one ``base`` classifier per class of ``classes``.

    A class with no positive row gets a constant-negative model and an
    :class:`EmptyClass` warning.
    """
    if base not in TRAINERS:
        raise ValueError(f"unknown base classifier {base!r}; choose from {sorted(TRAINERS)}")
    params = dict(params or {})
    X = np.asarray(X, dtype=float)
    Y = mask_matrix(masks, len(classes))
    trainer = TRAINERS[base]
    models, flags = [], {}
    for j, name in enumerate(classes):
        y = Y[:, j]
        if not y.any():
            warnings.warn(EmptyClass(f"class {name!r} has no positive training row"), stacklevel=2)
            flags[name] = "empty"
            models.append(TreeModel(Node(counts=(len(y), 0)), X.shape[1], degenerate=True))
            continue
        if y.all():
            flags[name] = "all-positive"
        with warnings.catch_warnings():
            # reported once through flags instead
            warnings.simplefilter("ignore", DegenerateLabels)
            models.append(trainer(X, y, **params))
    return OneVsRestModel(tuple(classes), base, models, params, flags)
