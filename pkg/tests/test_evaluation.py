from __future__ import annotations

import numpy as np
import pytest

from strokeminer.evaluation import (
    ConfusionMatrix,
    EvaluationReport,
    LearnerConfig,
    accuracy_from_confusion,
    aggregate_recording_prediction,
    holdout_evaluate,
    kfold_cross_validate,
    select_training_recordings,
)
from strokeminer.learners import C45Params
from strokeminer.strokedata import SkillClass
from strokeminer.utils.error_util import EmptyEvaluation, FoldError, InsufficientData, SchemaError
from strokeminer.utils.fold_util import stratified_folds
from tests.helpers import make_dataset, make_recording

EXPERT, NOVICE = SkillClass.EXPERT, SkillClass.NOVICE
ALPHABET = (EXPERT, NOVICE)


def separable(n_per_class=20, seed=0, with_sources=False):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-5, 1, size=(n_per_class, 3)), rng.normal(5, 1, size=(n_per_class, 3))])
    labels = ["E"] * n_per_class + ["N"] * n_per_class
    sources = None
    if with_sources:
        sources = [(f"{'e' if i < n_per_class else 'n'}{i // 4}", i % 4) for i in range(2 * n_per_class)]
    return make_dataset(X, labels, sources=sources)


def test_accuracy_from_confusion_counts():
    assert accuracy_from_confusion(ConfusionMatrix(ALPHABET, [[40, 0], [26, 72]])) == pytest.approx(81.2, abs=0.05)
    assert accuracy_from_confusion(np.eye(3, dtype=int) * 5) == 100.0
    assert accuracy_from_confusion([[0, 4], [7, 0]]) == 0.0
    with pytest.raises(EmptyEvaluation):
        accuracy_from_confusion(ConfusionMatrix(ALPHABET, [[0, 0], [0, 0]]))


def test_confusion_from_predictions_keeps_all_rows():
    cm = ConfusionMatrix.from_predictions([0, 0, 2], [0, 2, 2], (EXPERT, SkillClass.INTERMEDIATE, NOVICE))
    assert cm.counts.tolist() == [[1, 0, 1], [0, 0, 0], [0, 0, 1]]
    assert cm.row_sums() == {EXPERT: 2, SkillClass.INTERMEDIATE: 0, NOVICE: 1}
    assert "true \\ predicted" in cm.to_text()


def test_leave_one_out_folds():
    y = np.array([0] * 5 + [1] * 5)
    folds = stratified_folds(y, 2, 10, seed=1)
    assert sorted(folds.tolist()) == list(range(10))


def test_fold_sizes_are_balanced_per_class():
    rng = np.random.default_rng(0)
    for trial in range(20):
        y = rng.integers(0, 3, size=int(rng.integers(20, 60)))
        k = int(rng.integers(2, 8))
        folds = stratified_folds(y, 3, k, seed=trial)
        assert set(folds.tolist()) <= set(range(k))
        sizes = np.bincount(folds, minlength=k)
        assert sizes.max() - sizes.min() <= 1
        for c in range(3):
            per_class = np.bincount(folds[y == c], minlength=k)
            assert per_class.max() - per_class.min() <= 1


def test_grouped_folds_keep_recordings_together():
    ds = separable(with_sources=True)
    folds = stratified_folds(ds.y, 2, 5, seed=3, groups=ds.groups)
    for subject in set(ds.groups):
        assert len({f for f, g in zip(folds, ds.groups) if g == subject}) == 1
    with pytest.raises(FoldError):
        stratified_folds(ds.y, 2, 11, seed=3, groups=ds.groups)
    with pytest.raises(FoldError):
        stratified_folds(ds.y, 2, 41, seed=3)


def test_folds_need_a_class_as_large_as_k():
    y = np.array([0] * 4 + [1] * 4)
    with pytest.raises(FoldError):
        stratified_folds(y, 2, 6, seed=0)
    assert sorted(stratified_folds(y, 2, 4, seed=0).tolist()) == [0, 0, 1, 1, 2, 2, 3, 3]


def test_folds_are_seeded():
    y = np.array([0] * 30 + [1] * 30)
    assert np.array_equal(stratified_folds(y, 2, 5, seed=8), stratified_folds(y, 2, 5, seed=8))
    assert not np.array_equal(stratified_folds(y, 2, 5, seed=8), stratified_folds(y, 2, 5, seed=9))


def test_cross_validation_report():
    ds = separable()
    report = kfold_cross_validate(ds, k=10, seed=42)
    assert report.learner == "c45"
    assert report.recognition_rate_cv == 100.0
    assert report.recognition_rate_train == 100.0
    assert report.confusion_cv.row_sums() == {EXPERT: 20, NOVICE: 20}
    assert report.recognition_rate_cv == accuracy_from_confusion(report.confusion_cv)
    assert report.folds == 10 and report.seed == 42
    assert report.warnings == ()
    assert kfold_cross_validate(ds, k=10, seed=42).to_json() == report.to_json()


def test_cross_validation_rate_is_trace_over_total():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(60, 2))
    ds = make_dataset(X, ["E" if v > 0.3 else "N" for v in X[:, 0] + rng.normal(0, 1, 60)])
    for learner in (LearnerConfig("c45"), LearnerConfig("nbtree")):
        report = kfold_cross_validate(ds, k=5, learner=learner, seed=7)
        cm = report.confusion_cv
        assert report.recognition_rate_cv == pytest.approx(100.0 * np.trace(cm.counts) / cm.total)
        assert cm.total == len(ds)
        assert 0.0 <= report.recognition_rate_cv <= 100.0


def test_grouped_cross_validation_needs_provenance():
    with pytest.raises(SchemaError):
        kfold_cross_validate(separable(), k=5, group_by_recording=True)
    report = kfold_cross_validate(separable(with_sources=True), k=5, group_by_recording=True)
    assert report.group_by_recording


def test_absent_class_is_reported_as_warning():
    ds = make_dataset(np.arange(12.0), "EEEEEENNNNNN", classes=("expert", "intermediate", "novice"))
    report = kfold_cross_validate(ds, k=3, seed=0)
    assert report.warnings == ("class intermediate has no instances in the cross-validated set",)


def test_holdout_resubstitution_identity():
    ds = separable(with_sources=True)
    report = holdout_evaluate(ds, ds, LearnerConfig("c45", C45Params(prune=False)))
    assert report.recognition_rate_train == report.recognition_rate_eval
    assert report.confusion_train == report.confusion_eval
    assert {v.subject_id for v in report.recordings} == set(ds.groups)
    assert all(v.correct for v in report.recordings)


def test_holdout_reports_rates_independently():
    train, evaluation = separable(seed=1), separable(seed=2)
    report = holdout_evaluate(train, evaluation)
    assert report.recognition_rate_train is not None
    assert report.recognition_rate_eval is not None
    assert report.confusion_eval.total == len(evaluation)
    assert report.recognition_rate_cv is None
    row = report.to_text().splitlines()[1].split()
    assert row[0] == "c45" and row[1] == "-"


def test_holdout_schema_mismatch():
    with pytest.raises(SchemaError):
        holdout_evaluate(separable(), make_dataset(np.zeros((2, 3)), "EN", schema=("x", "y", "z")))


def test_report_json_round_trip():
    ds = separable(with_sources=True)
    report = kfold_cross_validate(ds, k=4, seed=1).combine(holdout_evaluate(ds, ds))
    again = EvaluationReport.from_dict(report.to_dict())
    assert again.to_json() == report.to_json()
    assert again.recognition_rate_eval == report.recognition_rate_eval


def test_recording_aggregation():
    e, n = {EXPERT: 1.0, NOVICE: 0.0}, {EXPERT: 0.0, NOVICE: 1.0}
    assert aggregate_recording_prediction([(EXPERT, e), (EXPERT, e), (NOVICE, n)]) is EXPERT
    tie = [(EXPERT, {EXPERT: 0.95, NOVICE: 0.05}), (EXPERT, {EXPERT: 0.95, NOVICE: 0.05}),
           (NOVICE, {EXPERT: 0.0, NOVICE: 0.8}), (NOVICE, {EXPERT: 0.0, NOVICE: 0.8})]
    assert aggregate_recording_prediction(tie) is EXPERT
    assert aggregate_recording_prediction([(NOVICE, {EXPERT: 0.4, NOVICE: 0.6})]) is NOVICE
    even = [(EXPERT, {EXPERT: 0.5, NOVICE: 0.5}), (NOVICE, {EXPERT: 0.5, NOVICE: 0.5})]
    assert aggregate_recording_prediction(even, ALPHABET) is EXPERT
    with pytest.raises(EmptyEvaluation):
        aggregate_recording_prediction([])


def swing(n_frames=60):
    t = np.linspace(0, 1, n_frames)
    coords = np.zeros((n_frames, 9, 2))
    coords[:, :, 0] = 100 * np.sin(2 * np.pi * t)[:, None]
    coords[:, :, 1] = 100 * np.cos(2 * np.pi * t)[:, None]
    return coords


def test_select_training_recordings_prefers_correlated_pair():
    rng = np.random.default_rng(0)
    a = make_recording(swing(), subject_id="a")
    b = make_recording(swing() + rng.normal(0, 1, size=(60, 9, 2)), subject_id="b")
    c = make_recording(rng.normal(0, 100, size=(60, 9, 2)), subject_id="c")
    assert select_training_recordings([c, a, b], "expert", 2) == (("a", "b"), ("c",))


def test_select_training_with_two_recordings():
    a = make_recording(swing(), subject_id="a")
    b = make_recording(swing(70), subject_id="b")
    train, evaluation = select_training_recordings([b, a], EXPERT, 1)
    assert len(train) == 1 and len(evaluation) == 1
    assert set(train + evaluation) == {"a", "b"}


def test_select_training_ties_go_to_first_subjects():
    recs = [make_recording(swing(), subject_id=name) for name in ("c", "a", "b")]
    assert select_training_recordings(recs, EXPERT, 2) == (("a", "b"), ("c",))
    assert select_training_recordings(recs, EXPERT, 1) == (("a",), ("b", "c"))


def test_select_training_needs_enough_recordings():
    with pytest.raises(InsufficientData):
        select_training_recordings([make_recording(swing(), subject_id="a")], EXPERT, 1)
