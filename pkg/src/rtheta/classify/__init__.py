"""Tree-based classifiers written from scratch, plus evaluation."""

from rtheta.classify.boosting import BoostedModel, train_boosted
from rtheta.classify.forest import ForestModel, train_forest
from rtheta.classify.metrics import EvalReport, Scores, evaluate, evaluate_binary
from rtheta.classify.multilabel import OneVsRestModel, train_multilabel
from rtheta.classify.persist import MODEL_SCHEMA, load_model, save_model
from rtheta.classify.tree import Node, TreeModel, train_tree

__all__ = [
    "BoostedModel",
    "EvalReport",
    "ForestModel",
    "MODEL_SCHEMA",
    "Node",
    "OneVsRestModel",
    "Scores",
    "TreeModel",
    "evaluate",
    "evaluate_binary",
    "load_model",
    "save_model",
    "train_boosted",
    "train_forest",
    "train_multilabel",
    "train_tree",
]
