"""
C4.5 decision-tree induction over numeric attributes.

Splits are binary (``value <= threshold`` goes left) at midpoints between
consecutive distinct values. The split with the best gain ratio among those
whose information gain reaches the node's mean gain wins; pruning replaces a
subtree by a leaf when the leaf's pessimistic error is no worse.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import stats

from strokeminer.learners.infotheory import candidate_table, select_gain_ratio
from strokeminer.strokedata import SkillClass
from strokeminer.utils.config_util import config_section
from strokeminer.utils.error_util import EmptyDataset, InvalidParameter, SchemaError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class C45Params:
    min_leaf: int = 2
    prune: bool = True
    cf: float = 0.25

    def __post_init__(self):
        if self.min_leaf < 1:
            raise InvalidParameter(f"min_leaf must be >= 1, got {self.min_leaf}")
        if not 0 < self.cf <= 1:
            raise InvalidParameter(f"cf must be in (0, 1], got {self.cf}")

    @classmethod
    def from_config(cls, config: dict) -> "C45Params":
        return cls(**config_section(config, "c45"))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Leaf:
    class_counts: Tuple[int, ...]
    majority: int


@dataclass(frozen=True)
class Internal:
    attribute: int
    threshold: float
    left: "Node"
    right: "Node"
    class_counts: Tuple[int, ...]


Node = Union[Leaf, Internal]


@dataclass(frozen=True)
class DecisionTree:
    root: Node
    schema: Tuple[str, ...]
    class_alphabet: Tuple[SkillClass, ...]
    params: C45Params = C45Params()

    learner = "c45"

    def node_count(self) -> int:
        return _count(self.root)

    def depth(self) -> int:
        return _depth(self.root)


def _count(node: Node) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + _count(node.left) + _count(node.right)


def _depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_depth(node.left), _depth(node.right))


def _majority(counts: np.ndarray, fallback: int) -> int:
    # lowest class index wins ties; an empty node keeps its parent's verdict
    return int(np.argmax(counts)) if counts.sum() > 0 else fallback


def _grow(X: np.ndarray, y: np.ndarray, n_classes: int, params: C45Params, fallback: int) -> Node:
    counts = np.bincount(y, minlength=n_classes)
    majority = _majority(counts, fallback)
    as_tuple = tuple(int(c) for c in counts)
    if np.count_nonzero(counts) <= 1 or len(y) < 2 * params.min_leaf:
        return Leaf(as_tuple, majority)

    split = select_gain_ratio(candidate_table(X, y, n_classes, params.min_leaf))
    if split is None:
        return Leaf(as_tuple, majority)

    goes_left = X[:, split.attribute] <= split.threshold
    left = _grow(X[goes_left], y[goes_left], n_classes, params, majority)
    right = _grow(X[~goes_left], y[~goes_left], n_classes, params, majority)
    return Internal(split.attribute, split.threshold, left, right, as_tuple)


def train_c45(ds, params: Optional[C45Params] = None) -> DecisionTree:
    """
    Grow a tree on ``ds`` and, when ``params.prune`` is set, prune it.

    :raises EmptyDataset: if ds has no instances.
    """
    params = params or C45Params()
    if len(ds) == 0:
        raise EmptyDataset("cannot train C4.5 on an empty dataset")
    k = len(ds.class_alphabet)
    y = ds.y
    root = _grow(ds.X, y, k, params, _majority(np.bincount(y, minlength=k), 0))
    tree = DecisionTree(root, ds.schema, ds.class_alphabet, params)
    log.debug(f"c45: grew {tree.node_count()} nodes, depth {tree.depth()}")
    if params.prune:
        tree = prune_tree(tree, ds, params.cf)
        log.debug(f"c45: {tree.node_count()} nodes after pruning at cf={params.cf}")
    return tree


def pessimistic_errors(n: int, errors: int, cf: float) -> float:
    """
    Upper confidence bound on the number of errors among n instances with
    ``errors`` observed mistakes, at confidence factor cf.
    """
    if n == 0:
        return 0.0
    if cf >= 1:
        return float(errors)
    if errors >= n:
        return float(n)
    return n * float(stats.beta.ppf(1 - cf, errors + 1, n - errors))


def _prune(node: Node, X: np.ndarray, y: np.ndarray, n_classes: int, cf: float, fallback: int):
    counts = np.bincount(y, minlength=n_classes)
    as_tuple = tuple(int(c) for c in counts)
    own_majority = node.majority if isinstance(node, Leaf) else _majority(np.asarray(node.class_counts), fallback)
    majority = _majority(counts, own_majority)
    leaf_error = pessimistic_errors(len(y), len(y) - int(counts[majority]), cf)
    if isinstance(node, Leaf):
        return Leaf(as_tuple, majority), leaf_error

    goes_left = X[:, node.attribute] <= node.threshold
    left, left_error = _prune(node.left, X[goes_left], y[goes_left], n_classes, cf, majority)
    right, right_error = _prune(node.right, X[~goes_left], y[~goes_left], n_classes, cf, majority)
    subtree_error = left_error + right_error
    if leaf_error <= subtree_error:
        return Leaf(as_tuple, majority), leaf_error
    return Internal(node.attribute, node.threshold, left, right, as_tuple), subtree_error


def prune_tree(tree: DecisionTree, ds, cf: float = 0.25) -> DecisionTree:
    """
    Bottom-up subtree replacement using the training instances in ``ds``.

    A subtree becomes a leaf when the leaf's pessimistic error is at most the
    summed pessimistic error of the subtree's leaves.
    """
    k = len(tree.class_alphabet)
    root, _ = _prune(tree.root, ds.X, ds.y, k, cf, 0)
    return DecisionTree(root, tree.schema, tree.class_alphabet, tree.params)


def check_features(features, schema) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64).reshape(-1)
    if len(x) != len(schema):
        raise SchemaError(f"expected {len(schema)} features, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise SchemaError("missing or non-finite feature value")
    return x


def _leaf_for(tree: DecisionTree, x: np.ndarray) -> Leaf:
    node = tree.root
    while isinstance(node, Internal):
        node = node.left if x[node.attribute] <= node.threshold else node.right
    return node


def leaf_distribution(leaf: Leaf, n_classes: int) -> np.ndarray:
    counts = np.asarray(leaf.class_counts, dtype=np.float64)
    if counts.sum() == 0:
        return np.eye(n_classes)[leaf.majority]
    return counts / counts.sum()


def predict_tree(tree: DecisionTree, features) -> Tuple[SkillClass, Dict[SkillClass, float]]:
    """
    Route one instance to its leaf.

    :return: the leaf majority and the normalized leaf class counts.
    :raises SchemaError: on a length mismatch or a non-finite value.
    """
    x = check_features(features, tree.schema)
    leaf = _leaf_for(tree, x)
    distribution = leaf_distribution(leaf, len(tree.class_alphabet))
    return tree.class_alphabet[leaf.majority], dict(zip(tree.class_alphabet, distribution.tolist()))


def predict_tree_batch(tree: DecisionTree, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Class indices and distributions for every row of X."""
    k = len(tree.class_alphabet)
    predicted = np.empty(len(X), dtype=np.int64)
    proba = np.empty((len(X), k))
    for i, row in enumerate(X):
        leaf = _leaf_for(tree, check_features(row, tree.schema))
        predicted[i] = leaf.majority
        proba[i] = leaf_distribution(leaf, k)
    return predicted, proba
