from __future__ import annotations

import json

import numpy as np
import pytest
from typer.testing import CliRunner

from strokeminer.cli import app
from strokeminer.learners import deserialize_model
from strokeminer.store import write_store
from strokeminer.synthgen import generate_recording
from strokeminer.windowing import export_dataset
from tests.helpers import linear_coords, make_dataset, make_recording

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


@pytest.fixture(scope="module")
def synthetic_store(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    result = invoke("--quiet", "synth", "--preset", "paper-cohort", "--seed", 42, "--out", base / "raw")
    assert result.exit_code == 0, result.output
    result = invoke("--quiet", "ingest", base / "raw" / "manifest.csv", "--out", base / "store")
    assert result.exit_code == 0, result.output
    return base / "store"


def test_ingest_two_recordings(tmp_path):
    write_store([make_recording(linear_coords(50), subject_id="expert_1"),
                 make_recording(linear_coords(60), subject_id="novice_1", skill="novice")], tmp_path / "raw")
    result = invoke("ingest", tmp_path / "raw" / "manifest.csv", "--out", tmp_path / "store")
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in (tmp_path / "store").glob("*.csv")) == ["expert_1.csv", "manifest.csv", "novice_1.csv"]
    first_row = (tmp_path / "store" / "expert_1.csv").read_text().splitlines()[1]
    assert first_row.startswith("0,0.0,0.0,")


def test_ingest_short_recording_warns_but_succeeds(tmp_path):
    write_store([make_recording(linear_coords(30), subject_id="novice_1", skill="novice")], tmp_path / "raw")
    result = invoke("ingest", tmp_path / "raw" / "manifest.csv", "--out", tmp_path / "store")
    assert result.exit_code == 0
    assert "frame count 30 < 40" in result.output
    assert (tmp_path / "store" / "novice_1.csv").exists()


def test_ingest_missing_file_is_hard_error(tmp_path):
    (tmp_path / "manifest.csv").write_text("recording,metadata\ngone.csv,gone.json\n")
    result = invoke("ingest", tmp_path / "manifest.csv", "--out", tmp_path / "store")
    assert result.exit_code == 2
    assert "gone.csv" in result.output


def test_analyze_empty_store_is_hard_error(tmp_path):
    (tmp_path / "manifest.csv").write_text("recording,metadata\n")
    assert invoke("analyze", tmp_path, "--out", tmp_path / "out").exit_code == 2


def test_analyze_writes_bundle(synthetic_store, tmp_path):
    result = invoke("--quiet", "analyze", synthetic_store, "--within-recording", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    for name in ("extrema.csv", "correlation.csv", "cohort_correlation.csv", "marker_pairs.csv", "speed/expert_1.csv"):
        assert (tmp_path / name).exists()


def test_windows_train_evaluate_report(synthetic_store, tmp_path):
    dataset = tmp_path / "dataset.csv"
    result = invoke("--quiet", "windows", synthetic_store, "--out", dataset)
    assert result.exit_code == 0, result.output
    header = dataset.read_text().splitlines()[0].split(",")
    assert len(header) == 90 + 3 and header[-3:] == ["class", "subject", "start_frame"]
    assert "intermediate" not in dataset.read_text()

    result = invoke("--quiet", "train", dataset, "--learner", "c45", "--model", tmp_path / "c45.model")
    assert result.exit_code == 0, result.output
    assert deserialize_model((tmp_path / "c45.model").read_text()).learner == "c45"

    result = invoke("--quiet", "evaluate", dataset, "--learner", "c45", "--folds", 3, "--seed", 1,
                    "--out", tmp_path / "reports")
    assert result.exit_code == 0, result.output
    document = json.loads((tmp_path / "reports" / "evaluation.json").read_text())
    assert document[0]["learner"] == "c45" and document[0]["folds"] == 3 and document[0]["seed"] == 1

    result = invoke("--quiet", "report", synthetic_store, "--evaluation", tmp_path / "reports" / "evaluation.json",
                    "--out", tmp_path / "bundle")
    assert result.exit_code == 0, result.output
    assert (tmp_path / "bundle" / "evaluation_rates.csv").exists()
    assert (tmp_path / "bundle" / "extrema.csv").exists()


def test_holdout_with_absent_class_exits_with_warnings(tmp_path):
    rng = np.random.default_rng(0)
    train = make_dataset(np.vstack([rng.normal(-4, 1, (10, 2)), rng.normal(4, 1, (10, 2))]), "E" * 10 + "N" * 10)
    evaluation = make_dataset(rng.normal(-4, 1, (5, 2)), "E" * 5)
    (tmp_path / "train.csv").write_text(export_dataset(train))
    (tmp_path / "eval.csv").write_text(export_dataset(evaluation))
    result = invoke("evaluate", "--learner", "c45", "--holdout", tmp_path / "train.csv", tmp_path / "eval.csv",
                    "--out", tmp_path / "reports")
    assert result.exit_code == 1
    assert "class novice has no instances in the evaluation set" in result.output


def test_bad_arguments(tmp_path):
    assert invoke("train", tmp_path / "nothing.csv", "--learner", "svm").exit_code == 2
    assert invoke("train", tmp_path / "nothing.csv").exit_code == 2
    assert invoke("synth", "--preset", "pro", "--out", tmp_path).exit_code == 2
    assert invoke("pipeline", "--out", tmp_path).exit_code == 2


def test_pipeline_holdout_keeps_single_recording_class_for_evaluation(tmp_path, expert_profile, novice_profile):
    recs = [generate_recording(expert_profile, seed, f"expert_{seed}") for seed in (1, 2, 3)]
    recs.append(generate_recording(novice_profile, 4, "novice_1"))
    write_store(recs, tmp_path / "raw")
    result = invoke("pipeline", tmp_path / "raw" / "manifest.csv", "--learner", "c45", "--folds", 2,
                    "--holdout-class-experts", 2, "--out", tmp_path / "out")
    assert result.exit_code == 1, result.output
    assert "novice: 1 recording, kept for evaluation only" in result.output
    run = json.loads((tmp_path / "out" / "pipeline.json").read_text())
    assert len(run["holdout_training_recordings"]) == 2
    assert all(s.startswith("expert_") for s in run["holdout_training_recordings"])
    assert "novice: 1 recording, kept for evaluation only" in run["warnings"]
    assert run["recognition_rates"]["c45"]["evaluation_data"] is not None


def test_no_prune_grows_to_consistency_unless_min_leaf_is_given(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 2))
    (tmp_path / "data.csv").write_text(export_dataset(make_dataset(X, rng.choice(["E", "N"], size=60))))
    result = invoke("--quiet", "train", tmp_path / "data.csv", "--no-prune", "--model", tmp_path / "grown.model")
    assert result.exit_code == 0, result.output
    grown = deserialize_model((tmp_path / "grown.model").read_text())
    assert (grown.params.prune, grown.params.min_leaf) == (False, 1)
    result = invoke("--quiet", "train", tmp_path / "data.csv", "--no-prune", "--min-leaf", 4,
                    "--model", tmp_path / "coarse.model")
    assert result.exit_code == 0, result.output
    assert deserialize_model((tmp_path / "coarse.model").read_text()).params.min_leaf == 4

    result = invoke("--quiet", "evaluate", tmp_path / "data.csv", "--learner", "c45", "--no-prune", "--folds", 3,
                    "--out", tmp_path / "reports")
    assert result.exit_code == 0, result.output
    document = json.loads((tmp_path / "reports" / "evaluation.json").read_text())
    assert document[0]["recognition_rate"]["learning_data"] == 100.0
