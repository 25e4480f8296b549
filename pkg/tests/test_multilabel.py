import json
import warnings

import numpy as np
import pytest

from rtheta.classify.multilabel import OneVsRestModel, matrix_to_masks, train_multilabel
from rtheta.classify.persist import MODEL_SCHEMA, load_model, model_from_json, model_to_json, save_model
from rtheta.classify.tree import train_tree
from rtheta.errors import EmptyClass, SchemaMismatch

from test_tree import random_dataset

CLASSES = ("a", "b", "c")


def multilabel_data(seed=0, rows=30):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(rows, 8))
    Y = np.column_stack([X[:, 0] > 0, X[:, 1] > 0.3, X[:, 2] + X[:, 3] > 0]).astype(int)
    return X, matrix_to_masks(Y)


def test_masks_round_trip():
    Y = np.array([[1, 0, 1], [0, 0, 0], [0, 1, 1]])
    assert matrix_to_masks(Y).tolist() == [5, 0, 6]


@pytest.mark.parametrize("base", ["tree", "forest", "boosted"])
def test_each_class_is_an_independent_binary_model(base):
    X, masks = multilabel_data()
    params = {"n_trees": 5} if base == "forest" else {"rounds": 10} if base == "boosted" else {}
    model = train_multilabel(X, masks, CLASSES, base, params)
    assert model.n_classes == 3
    assert model.predict_proba(X).shape == (30, 3)
    pm = model.predict_matrix(X)
    assert model.predict(X).tolist() == matrix_to_masks(pm).tolist()
    if base == "tree":
        for j in range(3):
            single = train_tree(X, (masks >> j) & 1)
            assert (single.predict(X) == pm[:, j]).all()


def test_single_class_masks_reduce_to_binary():
    X, y = random_dataset(4)
    model = train_multilabel(X, y, ("only",))
    assert (model.predict(X) == train_tree(X, y).predict(X)).all()


def test_all_positive_class_is_always_predicted():
    X, masks = multilabel_data()
    masks = masks | 4
    model = train_multilabel(X, masks, CLASSES)
    assert model.flags == {"c": "all-positive"}
    Xt, _ = multilabel_data(seed=9)
    assert ((model.predict(Xt) & 4) == 4).all()


def test_empty_class_is_constant_negative():
    X, masks = multilabel_data()
    masks = masks & 3
    with pytest.warns(EmptyClass):
        model = train_multilabel(X, masks, CLASSES)
    assert model.flags == {"c": "empty"}
    assert ((model.predict(X) & 4) == 0).all()


def test_no_degenerate_warning_leaks():
    X, masks = multilabel_data()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        train_multilabel(X, masks | 1, CLASSES)


def test_unknown_base():
    X, masks = multilabel_data()
    with pytest.raises(ValueError):
        train_multilabel(X, masks, CLASSES, "svm")


@pytest.mark.parametrize("base", ["tree", "forest", "boosted"])
def test_persist_round_trip_is_byte_stable(tmp_path, base):
    X, masks = multilabel_data(seed=2)
    params = {"n_trees": 4} if base == "forest" else {"rounds": 5} if base == "boosted" else {}
    model = train_multilabel(X, masks, CLASSES, base, params)
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    assert isinstance(back, OneVsRestModel)
    assert (back.predict(X) == model.predict(X)).all()
    assert model_to_json(back) == path.read_text()


def test_persist_rejects_bad_schema():
    X, masks = multilabel_data()
    doc = json.loads(model_to_json(train_multilabel(X, masks, CLASSES)))
    doc["schema"] = "other v9"
    with pytest.raises(SchemaMismatch):
        model_from_json(json.dumps(doc))
    doc["schema"] = MODEL_SCHEMA
    doc["model"]["kind"] = "svm"
    with pytest.raises(SchemaMismatch):
        model_from_json(json.dumps(doc))
