"""Schema-versioned JSON persistence for trained models."""

from __future__ import annotations

import json
from pathlib import Path

from rtheta.classify.boosting import BoostedModel
from rtheta.classify.forest import ForestModel
from rtheta.classify.multilabel import OneVsRestModel
from rtheta.classify.tree import TreeModel
from rtheta.errors import SchemaMismatch

MODEL_SCHEMA = "rtheta-model v1"
_TYPES = {
    "tree": TreeModel,
    "forest": ForestModel,
    "boosted": BoostedModel,
    "one-vs-rest": OneVsRestModel,
}


def model_to_json(model) -> str:
    doc = {"schema": MODEL_SCHEMA, "model": model.to_dict()}
    # repr-exact floats and sorted keys keep the file byte-stable
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def model_from_json(text: str):
    doc = json.loads(text)
    if doc.get("schema") != MODEL_SCHEMA:
        raise SchemaMismatch(f"expected schema {MODEL_SCHEMA!r}, got {doc.get('schema')!r}")
    body = doc["model"]
    try:
        return _TYPES[body["kind"]].from_dict(body)
    except KeyError as exc:
        raise SchemaMismatch(f"unknown or incomplete model: {exc}") from exc


def save_model(model, path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path):
    return model_from_json(Path(path).read_text(encoding="utf-8"))
