from typing import Dict, Tuple

import numpy as np

from strokeminer.learners.c45 import C45Params, DecisionTree, predict_tree, predict_tree_batch, prune_tree, train_c45
from strokeminer.learners.infotheory import SplitCandidate, entropy, evaluate_split
from strokeminer.learners.modelio import MODEL_HEADER, deserialize_model, serialize_model
from strokeminer.learners.naivebayes import NaiveBayesModel, fit_naive_bayes, predict_naive_bayes
from strokeminer.learners.nbtree import NBTree, NBTreeParams, predict_nbtree, predict_nbtree_batch, train_nbtree
from strokeminer.strokedata import SkillClass
from strokeminer.utils.error_util import InvalidParameter

LEARNERS = ("c45", "nbtree")


def predict_model(model, features) -> Tuple[SkillClass, Dict[SkillClass, float]]:
    """Class and per-class distribution for one feature vector, for either tree type."""
    if isinstance(model, DecisionTree):
        return predict_tree(model, features)
    if isinstance(model, NBTree):
        return predict_nbtree(model, features)
    raise InvalidParameter(f"not a trained model: {type(model).__name__}")


def predict_batch(model, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Class indices and distributions for every row of X."""
    if isinstance(model, DecisionTree):
        return predict_tree_batch(model, X)
    if isinstance(model, NBTree):
        return predict_nbtree_batch(model, X)
    raise InvalidParameter(f"not a trained model: {type(model).__name__}")
