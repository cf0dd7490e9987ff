"""
NBTree: a decision tree whose leaves are naive-Bayes models.

A node is split only if the cross-validated accuracy of naive Bayes on the
children beats the node's own naive-Bayes accuracy by a relative error
reduction above ``min_split_gain``.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np

from strokeminer.learners.c45 import check_features
from strokeminer.learners.infotheory import candidate_table
from strokeminer.learners.naivebayes import VARIANCE_FLOOR, NaiveBayesModel, fit_gaussian_nb
from strokeminer.strokedata import SkillClass
from strokeminer.utils.config_util import config_section
from strokeminer.utils.error_util import EmptyDataset, InvalidParameter
from strokeminer.utils.fold_util import stratified_folds

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NBTreeParams:
    cv_folds: int = 5
    min_split_gain: float = 0.05
    min_node: int = 30
    min_child: int = 5
    seed: int = 0
    variance_floor: float = VARIANCE_FLOOR

    def __post_init__(self):
        if self.cv_folds < 2:
            raise InvalidParameter(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.min_child < 1:
            raise InvalidParameter(f"min_child must be >= 1, got {self.min_child}")

    @classmethod
    def from_config(cls, config: dict) -> "NBTreeParams":
        section = config_section(config, "nbtree")
        floor = config_section(config, "naive_bayes").get("variance_floor", VARIANCE_FLOOR)
        section.setdefault("variance_floor", floor)
        return cls(**section)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class NBLeaf:
    model: NaiveBayesModel


@dataclass(frozen=True)
class NBInternal:
    attribute: int
    threshold: float
    left: "NBNode"
    right: "NBNode"
    class_counts: Tuple[int, ...]


NBNode = Union[NBLeaf, NBInternal]


@dataclass(frozen=True)
class NBTree:
    root: NBNode
    schema: Tuple[str, ...]
    class_alphabet: Tuple[SkillClass, ...]
    params: NBTreeParams = NBTreeParams()

    learner = "nbtree"

    def node_count(self) -> int:
        def count(node):
            return 1 if isinstance(node, NBLeaf) else 1 + count(node.left) + count(node.right)
        return count(self.root)


class _Grower:
    def __init__(self, n_classes, class_alphabet, params: NBTreeParams):
        self.n_classes = n_classes
        self.class_alphabet = class_alphabet
        self.params = params

    def fit(self, X, y) -> NaiveBayesModel:
        return fit_gaussian_nb(X, y, self.n_classes, self.class_alphabet, self.params.variance_floor)

    def cv_correct(self, X, y) -> int:
        """Instances naive Bayes classifies correctly under k-fold CV (resubstitution below 2)."""
        n = len(y)
        if n < 2:
            return int(np.sum(self.fit(X, y).predict_indices(X) == y))
        k = min(self.params.cv_folds, n)
        largest = int(np.bincount(y).max())
        if k < n:
            # stratification needs a class with k members, else leave-one-out
            k = min(k, largest) if largest >= 2 else n
        folds = stratified_folds(y, self.n_classes, k, self.params.seed)
        correct = 0
        for f in range(k):
            test = folds == f
            model = self.fit(X[~test], y[~test])
            correct += int(np.sum(model.predict_indices(X[test]) == y[test]))
        return correct

    def candidate_thresholds(self, X, y):
        """Per attribute the information-gain best midpoint and the median midpoint."""
        table = candidate_table(X, y, self.n_classes, self.params.min_child)
        if table is None:
            return []
        half = len(y) / 2
        candidates = []
        for attribute in np.unique(table.attribute):
            rows = np.flatnonzero(table.attribute == attribute)
            best_gain = rows[np.argmax(table.info_gain[rows])]
            median = rows[np.argmin(np.abs(table.left_size[rows] - half))]
            for row in sorted({best_gain, median}):
                candidates.append((int(attribute), float(table.threshold[row])))
        return candidates

    def grow(self, X, y) -> NBNode:
        model = self.fit(X, y)
        n = len(y)
        if n < self.params.min_node:
            return NBLeaf(model)
        leaf_errors = n - self.cv_correct(X, y)
        if leaf_errors == 0:
            return NBLeaf(model)

        best = None
        for attribute, threshold in self.candidate_thresholds(X, y):
            goes_left = X[:, attribute] <= threshold
            correct = self.cv_correct(X[goes_left], y[goes_left]) + self.cv_correct(X[~goes_left], y[~goes_left])
            # candidates arrive in (attribute, threshold) order, so only strictly better replaces
            if best is None or correct > best[0]:
                best = (correct, attribute, threshold)
        if best is None:
            return NBLeaf(model)

        correct, attribute, threshold = best
        reduction = (leaf_errors - (n - correct)) / leaf_errors
        if reduction <= self.params.min_split_gain:
            return NBLeaf(model)
        log.debug(f"nbtree: split {n} instances on attribute {attribute} at {threshold}, "
                  f"error reduction {reduction:.3f}")
        goes_left = X[:, attribute] <= threshold
        counts = tuple(int(c) for c in np.bincount(y, minlength=self.n_classes))
        return NBInternal(attribute, threshold, self.grow(X[goes_left], y[goes_left]),
                          self.grow(X[~goes_left], y[~goes_left]), counts)


def train_nbtree(ds, params: Optional[NBTreeParams] = None) -> NBTree:
    """
    :raises EmptyDataset: if ds has no instances.
    """
    params = params or NBTreeParams()
    if len(ds) == 0:
        raise EmptyDataset("cannot train NBTree on an empty dataset")
    grower = _Grower(len(ds.class_alphabet), ds.class_alphabet, params)
    tree = NBTree(grower.grow(ds.X, ds.y), ds.schema, ds.class_alphabet, params)
    log.debug(f"nbtree: {tree.node_count()} nodes")
    return tree


def _leaf_for(tree: NBTree, x: np.ndarray) -> NBLeaf:
    node = tree.root
    while isinstance(node, NBInternal):
        node = node.left if x[node.attribute] <= node.threshold else node.right
    return node


def predict_nbtree(tree: NBTree, features) -> Tuple[SkillClass, Dict[SkillClass, float]]:
    x = check_features(features, tree.schema)
    proba = _leaf_for(tree, x).model.predict_proba(x[None, :])[0]
    return tree.class_alphabet[int(np.argmax(proba))], dict(zip(tree.class_alphabet, proba.tolist()))


def predict_nbtree_batch(tree: NBTree, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    proba = np.empty((len(X), len(tree.class_alphabet)))
    for i, row in enumerate(X):
        x = check_features(row, tree.schema)
        proba[i] = _leaf_for(tree, x).model.predict_proba(x[None, :])[0]
    return np.argmax(proba, axis=1), proba
