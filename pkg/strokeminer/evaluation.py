"""
Evaluation harness: stratified k-fold cross-validation, resubstitution and
hold-out recognition rates, confusion matrices, and per-recording verdicts.

A recognition rate is always 100 * trace / total of its confusion matrix.
"""
import dataclasses
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.metrics import confusion_matrix
from tqdm import tqdm

from strokeminer.kinematics import trajectory_correlation
from strokeminer.learners import LEARNERS, C45Params, NBTreeParams, predict_batch, train_c45, train_nbtree
from strokeminer.strokedata import MarkerId, SkillClass, StrokeRecording
from strokeminer.utils.data_util import dumps_json, jsonable
from strokeminer.utils.error_util import (
    DegenerateSeries,
    EmptyEvaluation,
    InsufficientData,
    InvalidParameter,
    SchemaError,
)
from strokeminer.utils.fold_util import stratified_folds

log = logging.getLogger(__name__)

# summed-probability ties in recording verdicts
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[i][j]``: instances of true class i predicted as class j."""
    classes: Tuple[SkillClass, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.classes)
        if counts.shape != (k, k):
            raise InvalidParameter(f"confusion counts of shape {counts.shape} do not match {k} classes")
        if np.any(counts < 0):
            raise InvalidParameter("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "classes", tuple(SkillClass.parse(c) for c in self.classes))

    @classmethod
    def from_predictions(cls, y_true, y_pred, classes) -> "ConfusionMatrix":
        """Count class indices with sklearn, keeping every class of the alphabet as a row."""
        labels = list(range(len(classes)))
        if len(y_true) == 0:
            return cls(classes, np.zeros((len(labels), len(labels)), dtype=np.int64))
        return cls(classes, confusion_matrix(y_true, y_pred, labels=labels))

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.classes == other.classes and np.array_equal(self.counts, other.counts)

    __hash__ = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row_sums(self) -> Dict[SkillClass, int]:
        return dict(zip(self.classes, self.counts.sum(axis=1).tolist()))

    def to_dict(self) -> dict:
        return {"classes": [c.value for c in self.classes], "counts": self.counts.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(tuple(d["classes"]), np.array(d["counts"], dtype=np.int64))

    def to_frame(self) -> pd.DataFrame:
        names = [c.value for c in self.classes]
        return pd.DataFrame(self.counts, index=pd.Index(names, name="true"), columns=names)

    def to_text(self) -> str:
        frame = self.to_frame()
        frame.index.name = "true \\ predicted"
        return frame.to_string()


def accuracy_from_confusion(cm) -> float:
    """
    Recognition rate in percent.

    :param cm: a ConfusionMatrix or a square array of counts.
    :raises EmptyEvaluation: if the matrix holds no instances.
    """
    counts = cm.counts if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    total = counts.sum() if counts.size else 0
    if total <= 0:
        raise EmptyEvaluation("accuracy of an empty confusion matrix")
    return 100.0 * float(np.trace(counts)) / float(total)


@dataclass(frozen=True)
class LearnerConfig:
    name: str = "c45"
    params: object = None

    def __post_init__(self):
        if self.name not in LEARNERS:
            raise InvalidParameter(f"unknown learner {self.name!r}, expected one of {LEARNERS}")
        if self.params is None:
            object.__setattr__(self, "params", C45Params() if self.name == "c45" else NBTreeParams())

    @classmethod
    def from_config(cls, config: dict, name: str, **overrides) -> "LearnerConfig":
        if name == "c45":
            params = C45Params.from_config(config)
        elif name == "nbtree":
            params = NBTreeParams.from_config(config)
        else:
            raise InvalidParameter(f"unknown learner {name!r}, expected one of {LEARNERS}")
        overrides = {key: value for key, value in overrides.items()
                     if value is not None and key in params.to_dict()}
        return cls(name, dataclasses.replace(params, **overrides))

    def train(self, ds):
        if self.name == "c45":
            return train_c45(ds, self.params)
        return train_nbtree(ds, self.params)


@dataclass(frozen=True)
class RecordingVerdict:
    subject_id: str
    true_class: SkillClass
    predicted: SkillClass
    n_windows: int

    @property
    def correct(self) -> bool:
        return self.true_class == self.predicted


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    learner: str
    recognition_rate_cv: Optional[float] = None
    recognition_rate_train: Optional[float] = None
    recognition_rate_eval: Optional[float] = None
    confusion_cv: Optional[ConfusionMatrix] = None
    confusion_train: Optional[ConfusionMatrix] = None
    confusion_eval: Optional[ConfusionMatrix] = None
    folds: Optional[int] = None
    seed: Optional[int] = None
    group_by_recording: bool = False
    params: dict = field(default_factory=dict)
    recordings: Tuple[RecordingVerdict, ...] = ()
    warnings: Tuple[str, ...] = ()

    def combine(self, other: "EvaluationReport") -> "EvaluationReport":
        """Fill the settings this report lacks from another report of the same learner."""
        updates = {}
        for f in dataclasses.fields(self):
            mine, theirs = getattr(self, f.name), getattr(other, f.name)
            if mine is None or (f.name == "recordings" and not mine):
                updates[f.name] = theirs
        updates["warnings"] = self.warnings + tuple(w for w in other.warnings if w not in self.warnings)
        return dataclasses.replace(self, **updates)

    def to_dict(self) -> dict:
        def cm(matrix):
            return None if matrix is None else matrix.to_dict()
        return jsonable({
            "learner": self.learner,
            "params": self.params,
            "seed": self.seed,
            "folds": self.folds,
            "group_by_recording": self.group_by_recording,
            "recognition_rate": {
                "cross_validation": self.recognition_rate_cv,
                "learning_data": self.recognition_rate_train,
                "evaluation_data": self.recognition_rate_eval,
            },
            "confusion": {
                "cross_validation": cm(self.confusion_cv),
                "learning_data": cm(self.confusion_train),
                "evaluation_data": cm(self.confusion_eval),
            },
            "recordings": [
                {"subject_id": v.subject_id, "true": v.true_class, "predicted": v.predicted, "windows": v.n_windows}
                for v in self.recordings
            ],
            "warnings": list(self.warnings),
        })

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        def cm(matrix):
            return None if matrix is None else ConfusionMatrix.from_dict(matrix)
        rates, confusion = d["recognition_rate"], d["confusion"]
        return cls(
            learner=d["learner"],
            recognition_rate_cv=rates["cross_validation"],
            recognition_rate_train=rates["learning_data"],
            recognition_rate_eval=rates["evaluation_data"],
            confusion_cv=cm(confusion["cross_validation"]),
            confusion_train=cm(confusion["learning_data"]),
            confusion_eval=cm(confusion["evaluation_data"]),
            folds=d.get("folds"),
            seed=d.get("seed"),
            group_by_recording=d.get("group_by_recording", False),
            params=d.get("params", {}),
            recordings=tuple(RecordingVerdict(r["subject_id"], SkillClass.parse(r["true"]),
                                              SkillClass.parse(r["predicted"]), r["windows"])
                             for r in d.get("recordings", [])),
            warnings=tuple(d.get("warnings", [])),
        )

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def to_text(self) -> str:
        lines = [rate_table([self]).to_string(index=False)]
        for title, matrix in (("cross validation", self.confusion_cv), ("learning data", self.confusion_train),
                              ("evaluation data", self.confusion_eval)):
            if matrix is not None:
                lines += ["", f"{self.learner} confusion, {title}:", matrix.to_text()]
        if self.recordings:
            lines += ["", "recording verdicts:",
                      pd.DataFrame([(v.subject_id, v.true_class.value, v.predicted.value, v.n_windows)
                                    for v in self.recordings],
                                   columns=["subject", "true", "predicted", "windows"]).to_string(index=False)]
        return "\n".join(lines) + "\n"


def rate_table(reports: Sequence[EvaluationReport]) -> pd.DataFrame:
    """One row per learner: cross-validation, learning-data and evaluation-data rates."""
    def fmt(rate):
        return "-" if rate is None else f"{rate:.1f}"
    return pd.DataFrame(
        [(r.learner, fmt(r.recognition_rate_cv), fmt(r.recognition_rate_train), fmt(r.recognition_rate_eval))
         for r in reports],
        columns=["learner", "cross_valid", "learn_data", "eval_data"],
    )


def _absent_class_warnings(ds, what: str) -> Tuple[str, ...]:
    counts = ds.class_counts()
    warnings = tuple(f"class {c.value} has no instances in the {what}"
                     for c, n in zip(ds.class_alphabet, counts) if n == 0)
    for w in warnings:
        log.warning(w)
    return warnings


def _rate(matrix: ConfusionMatrix) -> Optional[float]:
    return accuracy_from_confusion(matrix) if matrix.total else None


def _run_fold(ds, folds: np.ndarray, fold: int, learner: LearnerConfig):
    test = np.flatnonzero(folds == fold)
    train = np.flatnonzero(folds != fold)
    model = learner.train(ds.subset(train))
    predicted, _ = predict_batch(model, ds.X[test])
    return test, predicted


def kfold_cross_validate(ds, k: int = 10, learner: Optional[LearnerConfig] = None, seed: int = 42,
                         group_by_recording: bool = False, n_jobs: int = 1,
                         progress: bool = False) -> EvaluationReport:
    """
    Stratified k-fold cross-validation plus the resubstitution rate of a model
    trained on all of ``ds``.

    Folds may run in parallel through joblib; predictions are reduced in fold
    order so the report does not depend on n_jobs.

    :raises FoldError: if k exceeds the number of instances (or recordings when grouped).
    :raises SchemaError: if grouping is requested for a dataset without provenance.
    """
    learner = learner or LearnerConfig()
    groups = None
    if group_by_recording:
        groups = ds.groups
        if groups is None:
            raise SchemaError("grouping by recording needs window provenance")
    y = ds.y
    folds = stratified_folds(y, len(ds.class_alphabet), k, seed, groups)
    log.info(f"{learner.name}: {k}-fold cross-validation on {len(ds)} instances, seed {seed}"
             f"{', grouped by recording' if group_by_recording else ''}")

    results = Parallel(n_jobs=n_jobs)(
        delayed(_run_fold)(ds, folds, f, learner)
        for f in tqdm(range(k), desc=f"{learner.name} folds", disable=not progress)
    )
    predicted = np.empty(len(ds), dtype=np.int64)
    for test, fold_predicted in results:
        predicted[test] = fold_predicted
    confusion_cv = ConfusionMatrix.from_predictions(y, predicted, ds.class_alphabet)

    model = learner.train(ds)
    resubstituted, _ = predict_batch(model, ds.X)
    confusion_train = ConfusionMatrix.from_predictions(y, resubstituted, ds.class_alphabet)

    return EvaluationReport(
        learner=learner.name,
        recognition_rate_cv=accuracy_from_confusion(confusion_cv),
        recognition_rate_train=accuracy_from_confusion(confusion_train),
        confusion_cv=confusion_cv,
        confusion_train=confusion_train,
        folds=k,
        seed=seed,
        group_by_recording=group_by_recording,
        params=learner.params.to_dict(),
        warnings=_absent_class_warnings(ds, "cross-validated set"),
    )


def recording_verdicts(model, ds) -> Tuple[RecordingVerdict, ...]:
    """Aggregate window predictions of each source recording, in order of first appearance."""
    if ds.sources is None:
        return ()
    predicted, proba = predict_batch(model, ds.X)
    by_subject: Dict[str, List[int]] = {}
    for i, subject in enumerate(ds.groups):
        by_subject.setdefault(subject, []).append(i)
    verdicts = []
    for subject, rows in by_subject.items():
        window_preds = [(ds.class_alphabet[predicted[i]], dict(zip(ds.class_alphabet, proba[i]))) for i in rows]
        verdict = aggregate_recording_prediction(window_preds, ds.class_alphabet)
        verdicts.append(RecordingVerdict(subject, ds.labels[rows[0]], verdict, len(rows)))
    return tuple(verdicts)


def holdout_evaluate(train, eval, learner: Optional[LearnerConfig] = None) -> EvaluationReport:
    """
    Train on ``train``; report its resubstitution rate and the rate on ``eval``.

    :raises SchemaError: if the two datasets differ in schema or class alphabet.
    """
    learner = learner or LearnerConfig()
    if not train.same_schema(eval):
        raise SchemaError("training and evaluation datasets have different schemas or class alphabets")
    model = learner.train(train)
    train_pred, _ = predict_batch(model, train.X)
    eval_pred, _ = predict_batch(model, eval.X)
    confusion_train = ConfusionMatrix.from_predictions(train.y, train_pred, train.class_alphabet)
    confusion_eval = ConfusionMatrix.from_predictions(eval.y, eval_pred, eval.class_alphabet)
    log.info(f"{learner.name}: hold-out on {len(train)} training / {len(eval)} evaluation instances")
    return EvaluationReport(
        learner=learner.name,
        recognition_rate_train=_rate(confusion_train),
        recognition_rate_eval=_rate(confusion_eval),
        confusion_train=confusion_train,
        confusion_eval=confusion_eval,
        params=learner.params.to_dict(),
        recordings=recording_verdicts(model, eval),
        warnings=_absent_class_warnings(train, "training set") + _absent_class_warnings(eval, "evaluation set"),
    )


def aggregate_recording_prediction(window_preds: Sequence[Tuple[SkillClass, Dict[SkillClass, float]]],
                                   class_alphabet: Optional[Sequence[SkillClass]] = None) -> SkillClass:
    """
    Majority vote over window classes; ties go to the higher summed predicted
    probability, then to the class that comes first in the alphabet.

    :raises EmptyEvaluation: for an empty list.
    """
    if not window_preds:
        raise EmptyEvaluation("no window predictions to aggregate")
    alphabet = tuple(class_alphabet) if class_alphabet is not None else tuple(SkillClass)
    votes = {c: 0 for c in alphabet}
    mass = {c: 0.0 for c in alphabet}
    for predicted, distribution in window_preds:
        votes[predicted] = votes.get(predicted, 0) + 1
        for c, p in distribution.items():
            mass[c] = mass.get(c, 0.0) + float(p)
    top = max(votes.values())
    tied = [c for c in alphabet if votes.get(c, 0) == top]
    best_mass = max(mass.get(c, 0.0) for c in tied)
    return next(c for c in tied if mass.get(c, 0.0) >= best_mass - TIE_TOLERANCE)


def _pair_scores(members: Sequence[StrokeRecording], marker, resample_n: int, align: str) -> np.ndarray:
    n = len(members)
    scores = np.eye(n)
    for i, j in itertools.combinations(range(n), 2):
        try:
            r = trajectory_correlation(members[i], members[j], marker, resample_n, align).mean
        except DegenerateSeries as e:
            log.warning(f"{e.message}; pair scored as -1")
            r = -1.0
        scores[i, j] = scores[j, i] = r
    return scores


def select_training_recordings(recs: Sequence[StrokeRecording], skill, n: int, marker=MarkerId.RACKET_TOP,
                               resample_n: int = 100, align: str = "time") -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    """
    Pick the n recordings of one class whose trajectories agree best.

    For n >= 2 the subset with the highest mean pairwise correlation (mean of
    r_x and r_y) wins; for n = 1 each recording is scored by its mean correlation
    with all others. Ties go to the subset that comes first in subject_id order.

    :return: (training subject ids, evaluation subject ids), each sorted.
    :raises InsufficientData: if the class has fewer than n + 1 recordings.
    """
    skill = SkillClass.parse(skill)
    if n < 1:
        raise InvalidParameter(f"need at least one training recording, got n={n}")
    members = sorted((r for r in recs if r.skill == skill), key=lambda r: r.subject_id)
    if len(members) < n + 1:
        raise InsufficientData(f"{skill.value}: {len(members)} recording(s), need at least {n + 1}")

    scores = _pair_scores(members, marker, resample_n, align)
    best, best_score = None, -np.inf
    if n == 1:
        candidates = (((i,), (scores[i].sum() - 1) / (len(members) - 1)) for i in range(len(members)))
    else:
        candidates = ((subset, np.mean([scores[i, j] for i, j in itertools.combinations(subset, 2)]))
                      for subset in itertools.combinations(range(len(members)), n))
    for subset, score in candidates:
        if score > best_score + TIE_TOLERANCE:
            best, best_score = subset, score

    train_ids = tuple(members[i].subject_id for i in best)
    eval_ids = tuple(r.subject_id for i, r in enumerate(members) if i not in best)
    log.info(f"{skill.value}: training on {list(train_ids)} (mean correlation {best_score:.3f}), "
             f"evaluating on {list(eval_ids)}")
    return train_ids, eval_ids
