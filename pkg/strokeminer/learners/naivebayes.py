"""
Gaussian naive Bayes, used on its own and as the leaf model of NBTree.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import special, stats

from strokeminer.strokedata import SkillClass
from strokeminer.utils.error_util import EmptyDataset, InvalidParameter

log = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    """
    Per-class Laplace-smoothed priors and per-attribute Gaussians.

    Rows of ``means`` and ``variances`` for classes with no training instances
    hold zeros and ones respectively; such classes are never predicted.
    """
    class_alphabet: Tuple[SkillClass, ...]
    class_counts: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    variance_floor: float = VARIANCE_FLOOR

    @property
    def present(self) -> np.ndarray:
        return self.class_counts > 0

    def log_joint(self, X: np.ndarray) -> np.ndarray:
        """log P(class) + sum of log N(x | mean, variance), shape (n, classes)."""
        X = np.atleast_2d(X)
        likelihood = stats.norm.logpdf(X[:, None, :], self.means[None], np.sqrt(self.variances)[None]).sum(axis=2)
        joint = np.log(self.priors)[None, :] + likelihood
        return np.where(self.present[None, :], joint, -np.inf)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        joint = self.log_joint(X)
        return np.exp(joint - special.logsumexp(joint, axis=1, keepdims=True))

    def predict_indices(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.log_joint(X), axis=1)


def fit_gaussian_nb(X: np.ndarray, y: np.ndarray, n_classes: int,
                    class_alphabet: Tuple[SkillClass, ...], variance_floor: float = VARIANCE_FLOOR) -> NaiveBayesModel:
    if len(y) == 0:
        raise EmptyDataset("cannot fit naive Bayes on an empty dataset")
    if variance_floor <= 0:
        raise InvalidParameter(f"variance floor must be positive, got {variance_floor}")
    counts = np.bincount(y, minlength=n_classes)
    priors = (counts + 1) / (len(y) + n_classes)
    means = np.zeros((n_classes, X.shape[1]))
    variances = np.ones((n_classes, X.shape[1]))
    for c in np.flatnonzero(counts):
        members = X[y == c]
        means[c] = members.mean(axis=0)
        variances[c] = np.maximum(members.var(axis=0), variance_floor)
    return NaiveBayesModel(tuple(class_alphabet), counts, priors, means, variances, variance_floor)


def fit_naive_bayes(ds, variance_floor: float = VARIANCE_FLOOR) -> NaiveBayesModel:
    """
    :raises EmptyDataset: if ds has no instances.
    """
    return fit_gaussian_nb(ds.X, ds.y, len(ds.class_alphabet), ds.class_alphabet, variance_floor)


def predict_naive_bayes(model: NaiveBayesModel, features) -> Tuple[SkillClass, Dict[SkillClass, float]]:
    proba = model.predict_proba(np.asarray(features, dtype=np.float64).reshape(1, -1))[0]
    best = int(np.argmax(proba))
    return model.class_alphabet[best], dict(zip(model.class_alphabet, proba.tolist()))
