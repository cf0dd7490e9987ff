"""Seeded property checks of the tree learners against independent oracles."""
from __future__ import annotations

import math

import numpy as np
import pytest

from strokeminer.learners import deserialize_model, serialize_model, train_nbtree
from strokeminer.learners.c45 import C45Params, Internal, predict_tree_batch, train_c45
from strokeminer.learners.nbtree import NBTreeParams
from tests.helpers import make_dataset

GROW_ONLY = C45Params(min_leaf=1, prune=False)


def _entropy(counts):
    n = sum(counts)
    return -sum(c / n * math.log2(c / n) for c in counts if c)


def brute_force_root(X, y):
    """Best (attribute, threshold) by gain ratio among splits reaching the mean gain, else None."""
    parent = [int(np.sum(y == c)) for c in (0, 1)]
    if min(parent) == 0 or len(y) < 2:
        return None
    n = len(y)
    candidates = []
    for a in range(X.shape[1]):
        values = sorted(set(X[:, a].tolist()))
        for low, high in zip(values, values[1:]):
            threshold = (low + high) / 2
            left = [int(np.sum((X[:, a] <= threshold) & (y == c))) for c in (0, 1)]
            right = [p - l for p, l in zip(parent, left)]
            n_left = sum(left)
            gain = _entropy(parent) - n_left / n * _entropy(left) - (n - n_left) / n * _entropy(right)
            split_info = _entropy([n_left, n - n_left])
            candidates.append((a, threshold, gain, gain / split_info))
    if not candidates:
        return None
    mean_gain = sum(c[2] for c in candidates) / len(candidates)
    admissible = [c for c in candidates if c[2] >= mean_gain - 1e-12]
    best = max(c[3] for c in admissible)
    a, threshold, _, _ = next(c for c in admissible if c[3] >= best - 1e-12)
    return a, threshold


def test_root_split_matches_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        d = int(rng.integers(1, 4))
        X = rng.integers(0, 3, size=(n, d)).astype(np.float64)
        y = rng.integers(0, 2, size=n)
        ds = make_dataset(X, ["EN"[c] for c in y])
        root = train_c45(ds, GROW_ONLY).root
        learned = (root.attribute, root.threshold) if isinstance(root, Internal) else None
        assert learned == brute_force_root(X, y), (X.tolist(), y.tolist())


def test_unpruned_tree_fits_consistent_data():
    rng = np.random.default_rng(11)
    for _ in range(100):
        X = rng.integers(0, 5, size=(30, 3)).astype(np.float64)
        labels = {}
        for row in X:
            labels.setdefault(tuple(row), "EN"[int(rng.integers(0, 2))])
        rows = np.array(list(labels))
        ds = make_dataset(rows, list(labels.values()))
        predicted, _ = predict_tree_batch(train_c45(ds, GROW_ONLY), ds.X)
        np.testing.assert_array_equal(predicted, ds.y)


@pytest.mark.parametrize("params", [GROW_ONLY, C45Params()])
def test_predictions_invariant_to_monotone_transform(params):
    rng = np.random.default_rng(5)
    for _ in range(50):
        X = rng.uniform(0.5, 4.0, size=(40, 3))
        score = X[:, 0] - X[:, 1] + rng.normal(0, 0.7, 40)
        labels = ["E" if s > 0 else "N" for s in score]
        column = int(rng.integers(0, 3))
        cubed = X.copy()
        cubed[:, column] = cubed[:, column] ** 3
        plain_tree = train_c45(make_dataset(X, labels), params)
        cubed_tree = train_c45(make_dataset(cubed, labels), params)
        rows = rng.integers(0, 40, size=25)
        plain = predict_tree_batch(plain_tree, X[rows])
        warped = predict_tree_batch(cubed_tree, cubed[rows])
        np.testing.assert_array_equal(plain[0], warped[0])
        np.testing.assert_array_equal(plain[1], warped[1])


def test_model_files_reserialize_identically():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(80, 4))
    labels = ["E" if a * b > 0 else "N" for a, b in X[:, :2]]
    ds = make_dataset(X, labels)
    for model in (train_c45(ds), train_c45(ds, GROW_ONLY),
                  train_nbtree(ds, NBTreeParams(min_node=20, min_child=5))):
        text = serialize_model(model)
        assert serialize_model(deserialize_model(text)) == text
