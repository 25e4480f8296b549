import warnings

import numpy as np
import pytest

from rtheta.classify.tree import Node, TreeModel, gini, midpoint, train_tree
from rtheta.errors import DegenerateLabels

from oracles import oracle_cart


def random_dataset(seed, rows=None, features=36):
    rng = np.random.default_rng(seed)
    n = rows or int(rng.integers(8, 31))
    X = np.empty((n, features))
    for f in range(features):
        # a mix of tie-heavy small-integer columns and continuous columns
        X[:, f] = rng.integers(0, 4, n) if f % 3 else rng.normal(size=n).round(2)
    y = rng.integers(0, 2, n)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return X, y


def same_tree(node: Node, ref: dict, X, rows) -> bool:
    """Compare feature, threshold and row partition at every node."""
    if node.is_leaf or "leaf" in ref:
        return node.is_leaf and "leaf" in ref and sorted(rows) == sorted(ref["rows"])
    if node.feature != ref["feature"] or node.threshold != ref["threshold"]:
        return False
    left = [i for i in rows if X[i, node.feature] <= node.threshold]
    right = [i for i in rows if X[i, node.feature] > node.threshold]
    return (
        left == ref["left"]["rows"]
        and right == ref["right"]["rows"]
        and same_tree(node.left, ref["left"], X, left)
        and same_tree(node.right, ref["right"], X, right)
    )


def test_one_dimensional_gap():
    model = train_tree([[1], [2], [9]], [0, 0, 1])
    assert model.root.feature == 0
    assert model.root.threshold == 5.5
    assert model.predict([[1], [2], [9]]).tolist() == [0, 0, 1]


def test_gini_of_pure_children():
    assert gini(np.array([0, 0, 1, 1])) == 0.5
    model = train_tree([[0], [0], [1], [1]], [0, 0, 1, 1])
    assert model.root.left.counts == (2, 0)
    assert model.root.right.counts == (0, 2)


@pytest.mark.parametrize("seed", range(10))
def test_matches_exhaustive_cart(seed):
    X, y = random_dataset(seed, rows=20)
    model = train_tree(X, y)
    assert same_tree(model.root, oracle_cart(X, y), X, list(range(len(y))))


@pytest.mark.parametrize("depth, min_leaf", [(2, 1), (3, 2), (16, 3)])
def test_matches_oracle_with_limits(depth, min_leaf):
    X, y = random_dataset(99, rows=25)
    model = train_tree(X, y, max_depth=depth, min_samples_leaf=min_leaf)
    assert same_tree(model.root, oracle_cart(X, y, depth, min_leaf), X, list(range(len(y))))
    assert model.root.depth() <= depth


def test_tie_goes_to_lowest_feature():
    X = np.array([[0, 0], [0, 0], [1, 1], [1, 1]], dtype=float)
    model = train_tree(X, [0, 0, 1, 1])
    assert model.root.feature == 0


def test_fully_grown_tree_fits_distinct_rows():
    X, y = random_dataset(5, rows=30)
    X[:, 0] = np.arange(30)
    assert (train_tree(X, y).predict(X) == y).all()


@pytest.mark.parametrize("seed", range(5))
def test_column_scaling_leaves_predictions(seed):
    X, y = random_dataset(seed, rows=25)
    rng = np.random.default_rng(seed + 100)
    col = int(rng.integers(0, X.shape[1]))
    Xs = X.copy()
    Xs[:, col] *= 7.25
    assert (train_tree(X, y).predict(X) == train_tree(Xs, y).predict(Xs)).all()


def test_single_class_is_flagged():
    with pytest.warns(DegenerateLabels):
        model = train_tree(np.zeros((4, 2)), [1, 1, 1, 1])
    assert model.degenerate
    assert model.predict(np.ones((2, 2))).tolist() == [1, 1]


def test_input_validation():
    with pytest.raises(ValueError):
        train_tree(np.zeros((3, 2)), [0, 1])
    with pytest.raises(ValueError):
        train_tree(np.zeros((2, 2)), [0, 2])
    with pytest.raises(ValueError):
        train_tree(np.zeros((0, 2)), [])


def test_midpoint_never_reaches_upper_value():
    a = 1.0
    b = np.nextafter(1.0, 2.0)
    assert midpoint(a, b) == a
    assert midpoint(1.0, 2.0) == 1.5


def test_predict_proba_and_round_trip():
    X, y = random_dataset(3)
    model = train_tree(X, y, max_depth=2)
    p = model.predict_proba(X)
    assert ((p >= 0) & (p <= 1)).all()
    back = TreeModel.from_dict(model.to_dict())
    assert (back.predict(X) == model.predict(X)).all()
    assert back.to_dict() == model.to_dict()


def test_no_warning_on_two_classes():
    X, y = random_dataset(1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        train_tree(X, y)
