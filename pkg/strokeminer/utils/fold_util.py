import logging
import warnings
from typing import Optional, Sequence

import numpy as np
from sklearn.model_selection import LeaveOneOut, StratifiedGroupKFold, StratifiedKFold

from strokeminer.utils.error_util import FoldError, InvalidParameter

log = logging.getLogger(__name__)

MAX_RANDOM_STATE = 2 ** 32


def stratified_folds(y: np.ndarray, n_classes: int, k: int, seed: int,
                     groups: Optional[Sequence] = None) -> np.ndarray:
    """
    Assign every instance to one of k test folds.

    Window-level folds come from sklearn's shuffled StratifiedKFold, so per class
    and overall the fold sizes differ by at most one. With ``groups`` the folds
    come from StratifiedGroupKFold and a group never spans two folds. k equal to
    the number of instances is leave-one-out.

    :param y: class indices, shape (n,).
    :param n_classes: size of the class alphabet; classes without instances are allowed.
    :param groups: optional group key per instance.
    :return: fold index per instance, shape (n,).
    :raises FoldError: if k exceeds the number of instances (or groups), or if no
        class has k instances to stratify over.
    """
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise InvalidParameter(f"need at least 2 folds, got {k}")
    n_units = len(set(groups)) if groups is not None else len(y)
    if k > n_units:
        what = "recordings" if groups is not None else "instances"
        raise FoldError(f"{k} folds requested but only {n_units} {what} available")

    folds = np.empty(len(y), dtype=np.int64)
    if groups is None and k == len(y):
        splits = LeaveOneOut().split(y)
    else:
        if k > np.bincount(y, minlength=n_classes).max():
            raise FoldError(f"{k} stratified folds need a class with at least {k} instances")
        random_state = int(seed) % MAX_RANDOM_STATE
        if groups is None:
            splits = StratifiedKFold(k, shuffle=True, random_state=random_state).split(y, y)
        else:
            splitter = StratifiedGroupKFold(k, shuffle=True, random_state=random_state)
            splits = splitter.split(y, y, groups=np.asarray(groups))
    with warnings.catch_warnings():
        # small classes spread over fewer folds than k
        warnings.simplefilter("ignore", UserWarning)
        for fold, (_, test) in enumerate(splits):
            folds[test] = fold
    log.debug(f"{k} folds over {len(y)} instances, sizes {np.bincount(folds, minlength=k).tolist()}")
    return folds
