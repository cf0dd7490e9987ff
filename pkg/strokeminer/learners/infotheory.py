"""
Information-theoretic primitives shared by the tree learners.

All candidate splits are binary: ``value <= threshold`` goes left. Thresholds are
midpoints between consecutive distinct sorted values of an attribute.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from strokeminer.utils.error_util import DegenerateSplit, EmptyPartition, InvalidParameter

# gain and gain-ratio comparisons treat differences below this as ties
TOLERANCE = 1e-12


@dataclass(frozen=True)
class SplitCandidate:
    attribute: int
    threshold: float
    info_gain: float
    split_info: float
    gain_ratio: float


@dataclass(frozen=True, eq=False)
class CandidateTable:
    """
    Every admissible-size threshold of every attribute at one node, in
    (attribute, threshold) ascending order.
    """
    attribute: np.ndarray
    threshold: np.ndarray
    left_size: np.ndarray
    info_gain: np.ndarray
    split_info: np.ndarray
    gain_ratio: np.ndarray

    def __len__(self):
        return len(self.attribute)

    def candidate(self, i) -> SplitCandidate:
        return SplitCandidate(int(self.attribute[i]), float(self.threshold[i]), float(self.info_gain[i]),
                              float(self.split_info[i]), float(self.gain_ratio[i]))


def entropy(class_counts) -> float:
    """
    Shannon entropy in bits of a class-count vector, with 0 log 0 = 0.

    :raises EmptyPartition: if all counts are zero.
    """
    counts = np.asarray(class_counts, dtype=np.float64)
    if np.any(counts < 0):
        raise InvalidParameter(f"class counts must be non-negative, got {class_counts}")
    if counts.sum() <= 0:
        raise EmptyPartition("entropy of an empty partition")
    return float(stats.entropy(counts, base=2))


def split_statistics(parent_counts: np.ndarray, left_counts: np.ndarray):
    """
    Information gain, split information and gain ratio of two-way partitions.

    :param parent_counts: class counts at the node, shape (k,).
    :param left_counts: class counts of the left side per candidate, shape (m, k);
        both sides must be non-empty.
    :return: three arrays of shape (m,).
    """
    parent = np.asarray(parent_counts, dtype=np.float64)
    left = np.atleast_2d(np.asarray(left_counts, dtype=np.float64))
    right = parent[None, :] - left
    n = parent.sum()
    n_left = left.sum(axis=1)
    n_right = n - n_left

    parent_entropy = stats.entropy(parent, base=2)
    children = (n_left / n) * stats.entropy(left, base=2, axis=1) \
        + (n_right / n) * stats.entropy(right, base=2, axis=1)
    info_gain = np.maximum(parent_entropy - children, 0.0)
    split_info = stats.entropy(np.column_stack([n_left, n_right]), base=2, axis=1)
    gain_ratio = info_gain / split_info
    return info_gain, split_info, gain_ratio


def evaluate_split(ds, attribute: int, threshold: float) -> SplitCandidate:
    """
    Score the partition ``ds.X[:, attribute] <= threshold``.

    :raises DegenerateSplit: if one side is empty.
    """
    column = ds.X[:, attribute]
    goes_left = column <= threshold
    if goes_left.all() or not goes_left.any():
        raise DegenerateSplit(f"threshold {threshold!r} leaves one side of attribute {attribute} empty")
    k = len(ds.class_alphabet)
    y = ds.y
    parent = np.bincount(y, minlength=k)
    left = np.bincount(y[goes_left], minlength=k)
    info_gain, split_info, gain_ratio = split_statistics(parent, left[None, :])
    return SplitCandidate(attribute, float(threshold), float(info_gain[0]), float(split_info[0]),
                          float(gain_ratio[0]))


def _midpoint(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    middle = (lower + upper) / 2
    # adjacent floats: keep the partition that "<= threshold" reproduces
    return np.where(middle < upper, middle, lower)


def candidate_table(X: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int = 1) -> Optional[CandidateTable]:
    """
    Enumerate the midpoint thresholds of every attribute whose two sides each hold
    at least ``min_leaf`` instances, with their split statistics.

    :return: the candidates, or None if there are none.
    """
    n, d = X.shape
    if n < 2:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    values = np.take_along_axis(X, order, axis=0)
    onehot = np.eye(n_classes, dtype=np.int64)[y]
    cumulative = np.cumsum(onehot[order], axis=0)          # (n, d, k)

    left_size = np.arange(1, n)[:, None]                   # candidate after sorted position i
    valid = (values[:-1] < values[1:]) & (left_size >= min_leaf) & (n - left_size >= min_leaf)
    attribute, position = np.nonzero(valid.T)              # attribute-major, thresholds ascending
    if len(attribute) == 0:
        return None

    parent = np.bincount(y, minlength=n_classes)
    left_counts = cumulative[position, attribute]
    info_gain, split_info, gain_ratio = split_statistics(parent, left_counts)
    threshold = _midpoint(values[position, attribute], values[position + 1, attribute])
    return CandidateTable(attribute, threshold, position + 1, info_gain, split_info, gain_ratio)


def select_gain_ratio(table: Optional[CandidateTable]) -> Optional[SplitCandidate]:
    """
    The C4.5 choice: among candidates whose information gain reaches the mean gain,
    the highest gain ratio; ties go to the lowest attribute index, then the lowest
    threshold. When every gain is zero all candidates are admissible.
    """
    if table is None or len(table) == 0:
        return None
    admissible = table.info_gain >= table.info_gain.mean() - TOLERANCE
    best = table.gain_ratio[admissible].max()
    chosen = np.flatnonzero(admissible & (table.gain_ratio >= best - TOLERANCE))[0]
    return table.candidate(chosen)
