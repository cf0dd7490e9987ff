from __future__ import annotations

import numpy as np
import pytest

from strokeminer.learners import serialize_model
from strokeminer.learners.c45 import (
    C45Params,
    DecisionTree,
    Internal,
    Leaf,
    pessimistic_errors,
    predict_tree,
    prune_tree,
    train_c45,
)
from strokeminer.strokedata import SkillClass
from strokeminer.utils.error_util import EmptyDataset, InvalidParameter, SchemaError
from tests.helpers import make_dataset

EXPERT, NOVICE = SkillClass.EXPERT, SkillClass.NOVICE
ALPHABET = (EXPERT, NOVICE)


def test_pure_dataset_gives_single_leaf():
    tree = train_c45(make_dataset([1, 2, 3], "EEE"))
    assert isinstance(tree.root, Leaf)
    assert predict_tree(tree, [7.0])[0] is EXPERT


def test_root_split_at_midpoint():
    ds = make_dataset([1, 2, 3, 4], "EENN")
    for params in (C45Params(), C45Params(min_leaf=1, prune=False)):
        tree = train_c45(ds, params)
        assert isinstance(tree.root, Internal)
        assert (tree.root.attribute, tree.root.threshold) == (0, 2.5)
        assert tree.root.left == Leaf((2, 0), 0)
        assert tree.root.right == Leaf((0, 2), 1)


def test_boundary_value_routes_left():
    tree = train_c45(make_dataset([1, 2, 3, 4], "EENN"))
    assert predict_tree(tree, [2.5])[0] is EXPERT
    assert predict_tree(tree, [np.nextafter(2.5, 3.0)])[0] is NOVICE


def test_single_leaf_distribution():
    tree = DecisionTree(Leaf((40, 0), 0), ("a0",), ALPHABET)
    predicted, distribution = predict_tree(tree, [123.0])
    assert predicted is EXPERT
    assert distribution[EXPERT] == 1.0
    assert sum(distribution.values()) == pytest.approx(1.0)


def test_fixture_tree_hand_trace():
    # a0 <= 1.5 ? expert : (a1 <= 0.5 ? novice : expert)
    root = Internal(0, 1.5, Leaf((3, 0), 0), Internal(1, 0.5, Leaf((1, 4), 1), Leaf((2, 0), 0), (2, 4)), (5, 4))
    tree = DecisionTree(root, ("a0", "a1"), ALPHABET)
    assert predict_tree(tree, [2.0, 0.5]) == (NOVICE, {EXPERT: 0.2, NOVICE: 0.8})
    assert predict_tree(tree, [2.0, 0.6])[0] is EXPERT
    assert predict_tree(tree, [1.5, 9.0])[0] is EXPERT


def test_empty_leaf_inherits_parent_majority():
    tree = DecisionTree(Internal(0, 0.0, Leaf((0, 0), 1), Leaf((3, 0), 0), (3, 0)), ("a0",), ALPHABET)
    predicted, distribution = predict_tree(tree, [-1.0])
    assert predicted is NOVICE
    assert distribution == {EXPERT: 0.0, NOVICE: 1.0}


def test_prediction_schema_errors():
    tree = train_c45(make_dataset([[1, 1], [2, 2]], "EN"))
    with pytest.raises(SchemaError):
        predict_tree(tree, [1.0])
    with pytest.raises(SchemaError):
        predict_tree(tree, [1.0, float("nan")])


def test_training_errors():
    with pytest.raises(InvalidParameter):
        C45Params(min_leaf=0)
    with pytest.raises(InvalidParameter):
        C45Params(cf=0.0)
    empty = make_dataset(np.zeros((0, 1)), "")
    with pytest.raises(EmptyDataset):
        train_c45(empty)


def test_pessimistic_error_bound():
    assert pessimistic_errors(5, 0, 0.25) == pytest.approx(5 * (1 - 0.25 ** (1 / 5)))
    assert pessimistic_errors(4, 4, 0.25) == 4.0
    assert pessimistic_errors(10, 3, 1.0) == 3.0
    assert pessimistic_errors(0, 0, 0.25) == 0.0
    assert pessimistic_errors(10, 1, 0.25) > 1.0


def test_prune_collapses_noisy_subtree():
    ds = make_dataset(np.arange(1, 11), "EEENEEEEEN")
    subtree = Internal(0, 5.5, Leaf((4, 1), 0), Leaf((4, 1), 0), (8, 2))
    tree = DecisionTree(subtree, ("a0",), ALPHABET)
    leaf_error = pessimistic_errors(10, 2, 0.25)
    subtree_error = 2 * pessimistic_errors(5, 1, 0.25)
    assert leaf_error <= subtree_error
    pruned = prune_tree(tree, ds, 0.25)
    assert pruned.root == Leaf((8, 2), 0)


def test_prune_leaves_single_leaf_unchanged():
    ds = make_dataset([1, 2, 3], "EEN")
    tree = DecisionTree(Leaf((2, 1), 0), ("a0",), ALPHABET)
    assert prune_tree(tree, ds, 0.25).root == tree.root


def test_prune_keeps_error_free_tree_at_cf_one():
    ds = make_dataset([1, 2, 3, 4, 5, 6], "EEENNN")
    tree = train_c45(ds, C45Params(min_leaf=1, prune=False))
    assert prune_tree(tree, ds, 1.0).root == tree.root


def test_pruning_never_grows_trees():
    rng = np.random.default_rng(21)
    for _ in range(30):
        X = rng.integers(0, 4, size=(40, 3)).astype(float)
        labels = ["E" if v else "N" for v in rng.integers(0, 2, size=40)]
        ds = make_dataset(X, labels)
        grown = train_c45(ds, C45Params(prune=False))
        pruned = prune_tree(grown, ds, 0.25)
        assert pruned.node_count() <= grown.node_count()


def test_training_is_deterministic():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(60, 4))
    labels = ["E" if x[0] + x[1] > 0 else "N" for x in X]
    ds = make_dataset(X, labels)
    assert serialize_model(train_c45(ds)) == serialize_model(train_c45(ds))
