"""
Command line: ingest -> analyze -> windows -> train -> evaluate -> report, plus
synthetic data and a one-shot pipeline.

Exit codes: 0 success, 1 finished with evaluation-level warnings, 2 hard error.
"""
import contextlib
import dataclasses
import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
import typer

from strokeminer.evaluation import (
    LearnerConfig,
    holdout_evaluate,
    kfold_cross_validate,
    select_training_recordings,
)
from strokeminer.kinematics import ALIGNMENTS, marker_pair_correlation
from strokeminer.learners import LEARNERS, serialize_model
from strokeminer.reporting import read_evaluation, write_analytics, write_evaluation
from strokeminer.store import ingest, ingest_recordings, load_store, read_manifest, write_store
from strokeminer.strokedata import SkillClass, ValidationPolicy, marker_id
from strokeminer.synthgen import CohortSpec, SkillProfile, generate_cohort
from strokeminer.utils.config_util import config_path, config_section, load_config
from strokeminer.utils.data_util import dumps_json, write_text
from strokeminer.utils.error_util import (
    EXIT_HARD_ERROR,
    EXIT_OK,
    EXIT_WARNINGS,
    DegenerateSeries,
    InvalidParameter,
    StrokeMinerException,
)
from strokeminer.utils.timer_util import StageTimer
from strokeminer.utils.typer_util import split_list, unwrap_typer_param
from strokeminer.windowing import Dataset, WindowSpec, build_dataset, export_dataset, import_dataset

log = logging.getLogger(__name__)

app = typer.Typer(pretty_exceptions_show_locals=False, add_completion=False,
                  help="Skill analysis of table-tennis forehand strokes.")

PAPER_COHORT = "paper-cohort"
PRESETS = tuple(c.value for c in SkillClass) + (PAPER_COHORT,)


@dataclass
class CliState:
    config: dict
    seed: Optional[int]
    out: Path
    quiet: bool

    def seed_for(self, override: Optional[int], section: str) -> int:
        if override is not None:
            return override
        if self.seed is not None:
            return self.seed
        return int(config_section(self.config, section).get("seed", 0))

    def out_dir(self, override: Optional[Path]) -> Path:
        return override if override is not None else self.out


@contextlib.contextmanager
def stage(name: str):
    """Time a stage and turn its errors into the matching exit code."""
    with StageTimer(name, log):
        try:
            yield
        except StrokeMinerException as e:
            log.error(f"{name}: {e.message}")
            raise typer.Exit(code=e.code)
        except OSError as e:
            log.error(f"{name}: {e}")
            raise typer.Exit(code=EXIT_HARD_ERROR)


def finish(warnings) -> None:
    if warnings:
        for warning in warnings:
            log.warning(warning)
        raise typer.Exit(code=EXIT_WARNINGS)
    raise typer.Exit(code=EXIT_OK)


def banner(command: str, **params) -> None:
    lines = [f"[{command}]"] + [f"    {key}: {value}" for key, value in params.items()]
    log.info("\n".join(lines))


def _state(ctx: typer.Context) -> CliState:
    return ctx.obj


@app.callback()
@unwrap_typer_param
def main(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, help="Seed for every seeded stage, overrides the config"),
    out: Path = typer.Option(Path("out"), help="Output directory"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Only log warnings and errors"),
    config_path: Path = typer.Option(config_path, help="Path to the configuration file"),
):
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, force=True,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(config_path)
    except StrokeMinerException as e:
        log.error(f"config: {e.message}")
        raise typer.Exit(code=e.code)
    ctx.obj = CliState(config, seed, out, quiet)


@app.command("ingest")
@unwrap_typer_param
def cmd_ingest(
    ctx: typer.Context,
    manifest: Path = typer.Argument(..., help="Manifest CSV with recording,metadata columns"),
    out: Optional[Path] = typer.Option(None, help="Store directory, defaults to the global --out"),
):
    """Parse, validate and normalize recordings into a canonical store."""
    state = _state(ctx)
    out = state.out_dir(out)
    banner("ingest", manifest=manifest, out=out)
    with stage("ingest"):
        recs, findings = ingest(read_manifest(manifest), ValidationPolicy.from_config(state.config), state.config)
        write_store(recs, out)
    flagged = sum(1 for f in findings.values() if f)
    typer.echo(f"ingested {len(recs)} recordings into {out} ({flagged} with warnings)")
    raise typer.Exit(code=EXIT_OK)


@app.command("analyze")
@unwrap_typer_param
def cmd_analyze(
    ctx: typer.Context,
    store: Path = typer.Argument(..., help="Store directory or manifest"),
    markers: Optional[str] = typer.Option(None, help="Markers of the extrema table, e.g. 1,4,9"),
    marker: Optional[int] = typer.Option(None, help="Marker whose trajectories are correlated"),
    resample_n: Optional[int] = typer.Option(None, help="Resampled trajectory length"),
    align: Optional[str] = typer.Option(None, help=f"Trajectory alignment: {', '.join(ALIGNMENTS)}"),
    within_recording: bool = typer.Option(False, help="Also correlate marker pairs within each recording"),
    out: Optional[Path] = typer.Option(None, help="Output directory, defaults to the global --out"),
):
    """Extrema table, speed profiles and trajectory correlations."""
    state = _state(ctx)
    section = config_section(state.config, "kinematics")
    markers = split_list(markers, marker_id) if markers else [marker_id(m) for m in section["report_markers"]]
    marker = marker_id(marker if marker is not None else section["correlation_marker"])
    resample_n = resample_n or section["resample_n"]
    align = align or section["align"]
    out = state.out_dir(out)
    banner("analyze", store=store, markers=[m.value for m in markers], marker=marker.value,
           resample_n=resample_n, align=align, out=out)

    warnings = []
    with stage("analyze"):
        recs = load_store(store, state.config)
        summary = write_analytics(recs, out, markers, marker, resample_n, align)
        if within_recording:
            warnings += _write_marker_pairs(recs, markers, out)
    warnings += [f"correlation skipped for {a} vs {b}: degenerate series" for a, b in summary["skipped_pairs"]]
    typer.echo(pd.read_csv(out / "extrema.csv").to_string(index=False))
    if (out / "cohort_correlation.csv").exists():
        typer.echo(pd.read_csv(out / "cohort_correlation.csv").to_string(index=False))
    finish(warnings)


def _write_marker_pairs(recs, markers, out: Path) -> List[str]:
    rows, warnings = [], []
    for rec in recs:
        for a, b in itertools.combinations(markers, 2):
            try:
                r = marker_pair_correlation(rec, a, b)
            except DegenerateSeries as e:
                warnings.append(e.message)
                continue
            rows.append((rec.subject_id, a.value, b.value, r.r_x, r.r_y, r.mean))
    frame = pd.DataFrame(rows, columns=["subject", "marker_a", "marker_b", "r_x", "r_y", "r_mean"])
    write_text(out / "marker_pairs.csv", frame.to_csv(index=False, lineterminator="\n"))
    return warnings


def _window_spec(config, window_len, overlap, differenced) -> WindowSpec:
    spec = WindowSpec.from_config(config)
    updates = {"window_len": window_len, "overlap": overlap, "differenced": differenced or None}
    return dataclasses.replace(spec, **{k: v for k, v in updates.items() if v is not None})


def _classes(config, classes: Optional[str]):
    if classes:
        return SkillClass.ordered(split_list(classes, SkillClass.parse))
    return SkillClass.ordered(config_section(config, "windowing").get("classes", ["expert", "novice"]))


@app.command("windows")
@unwrap_typer_param
def cmd_windows(
    ctx: typer.Context,
    input: Path = typer.Argument(..., help="Store directory or manifest of normalized recordings"),
    window_len: Optional[int] = typer.Option(None, help="Frames per window"),
    overlap: Optional[int] = typer.Option(None, help="Frames shared by consecutive windows"),
    classes: Optional[str] = typer.Option(None, help="Classes to keep, e.g. expert,novice"),
    differenced: bool = typer.Option(False, help="Window frame-to-frame deltas instead of positions"),
    provenance: bool = typer.Option(True, help="Write subject,start_frame columns"),
    out: Optional[Path] = typer.Option(None, help="Dataset CSV, defaults to <--out>/dataset.csv"),
):
    """Cut recordings into overlapping feature windows."""
    state = _state(ctx)
    out = out or state.out / "dataset.csv"
    with stage("windows"):
        spec = _window_spec(state.config, window_len, overlap, differenced)
        alphabet = _classes(state.config, classes)
        banner("windows", input=input, window_len=spec.window_len, overlap=spec.overlap,
               differenced=spec.differenced, classes=[c.value for c in alphabet], out=out)
        ds = build_dataset(load_store(input, state.config), spec, alphabet)
        write_text(out, export_dataset(ds, provenance=provenance))
    typer.echo(f"{len(ds)} windows x {len(ds.schema)} attributes -> {out}")
    raise typer.Exit(code=EXIT_OK)


def _learner_names(config, learner: Optional[str]) -> List[str]:
    names = split_list(learner) if learner else list(config_section(config, "evaluation").get("learners", LEARNERS))
    unknown = [n for n in names if n not in LEARNERS]
    if unknown:
        raise typer.BadParameter(f"unknown learner(s) {unknown}, expected {list(LEARNERS)}")
    return names


def _learner(state: CliState, name: str, no_prune=False, cf=None, min_leaf=None, seed=None) -> LearnerConfig:
    if no_prune and min_leaf is None:
        # unpruned trees grow until every leaf is pure
        min_leaf = 1
    return LearnerConfig.from_config(state.config, name, prune=False if no_prune else None, cf=cf,
                                     min_leaf=min_leaf, seed=seed)


@app.command("train")
@unwrap_typer_param
def cmd_train(
    ctx: typer.Context,
    dataset: Path = typer.Argument(..., help="Dataset CSV"),
    learner: str = typer.Option("c45", help="c45 or nbtree"),
    no_prune: bool = typer.Option(False, "--no-prune", help="Skip C4.5 pruning"),
    cf: Optional[float] = typer.Option(None, help="C4.5 pruning confidence factor"),
    min_leaf: Optional[int] = typer.Option(None, help="C4.5 minimum instances per branch"),
    seed: Optional[int] = typer.Option(None, help="NBTree cross-validation seed"),
    model: Optional[Path] = typer.Option(None, help="Model file, defaults to <--out>/<learner>.model"),
):
    """Train one learner on a dataset and write the model file."""
    state = _state(ctx)
    name = _learner_names(state.config, learner)[0]
    model_path = model or state.out / f"{name}.model"
    with stage("train"):
        config = _learner(state, name, no_prune, cf, min_leaf, seed if seed is not None else state.seed)
        banner("train", dataset=dataset, learner=name, params=config.params.to_dict(), model=model_path)
        trained = config.train(import_dataset(dataset.read_text(encoding="utf-8")))
        write_text(model_path, serialize_model(trained))
    typer.echo(f"{name}: {trained.node_count()} nodes -> {model_path}")
    raise typer.Exit(code=EXIT_OK)


def _with_alphabet(ds: Dataset, alphabet) -> Dataset:
    return Dataset(ds.schema, alphabet, ds.X, ds.labels, ds.sources)


@app.command("evaluate")
@unwrap_typer_param
def cmd_evaluate(
    ctx: typer.Context,
    dataset: Optional[Path] = typer.Argument(None, help="Dataset CSV for cross-validation"),
    learner: Optional[str] = typer.Option(None, help="Learners, e.g. c45,nbtree"),
    folds: Optional[int] = typer.Option(None, help="Cross-validation folds"),
    seed: Optional[int] = typer.Option(None, help="Fold assignment seed"),
    group_by_recording: bool = typer.Option(False, help="Keep all windows of a recording in one fold"),
    holdout: Tuple[Path, Path] = typer.Option((None, None), help="Training and evaluation dataset CSVs"),
    no_prune: bool = typer.Option(False, "--no-prune", help="Skip C4.5 pruning"),
    min_leaf: Optional[int] = typer.Option(None, help="C4.5 minimum instances per branch"),
    out: Optional[Path] = typer.Option(None, help="Report directory, defaults to the global --out"),
):
    """Cross-validation and hold-out recognition rates."""
    state = _state(ctx)
    section = config_section(state.config, "evaluation")
    names = _learner_names(state.config, learner)
    folds = folds or section["folds"]
    seed = state.seed_for(seed, "evaluation")
    out = state.out_dir(out)
    train_path, eval_path = holdout
    if dataset is None and train_path is None:
        raise typer.BadParameter("give a dataset, --holdout TRAIN EVAL, or both")
    banner("evaluate", dataset=dataset, learners=names, folds=folds, seed=seed,
           group_by_recording=group_by_recording, holdout=list(holdout), out=out)

    reports = []
    with stage("evaluate"):
        ds = import_dataset(dataset.read_text(encoding="utf-8")) if dataset is not None else None
        if train_path is not None:
            train = import_dataset(Path(train_path).read_text(encoding="utf-8"))
            evaluation = import_dataset(Path(eval_path).read_text(encoding="utf-8"))
            alphabet = SkillClass.ordered(train.class_alphabet + evaluation.class_alphabet)
            train, evaluation = _with_alphabet(train, alphabet), _with_alphabet(evaluation, alphabet)
        for name in names:
            config = _learner(state, name, no_prune, min_leaf=min_leaf)
            report = None
            if ds is not None:
                report = kfold_cross_validate(ds, folds, config, seed, group_by_recording,
                                              n_jobs=section.get("n_jobs", 1), progress=not state.quiet)
            if train_path is not None:
                held = holdout_evaluate(train, evaluation, config)
                report = held if report is None else report.combine(held)
            reports.append(report)
        write_evaluation(reports, out)
    typer.echo("\n".join(r.to_text() for r in reports))
    finish([w for r in reports for w in r.warnings])


def _cohort(state: CliState, preset: str, count: Optional[int]) -> CohortSpec:
    if preset == PAPER_COHORT:
        return CohortSpec.reference(state.config)
    if preset not in PRESETS:
        raise InvalidParameter(f"unknown preset {preset!r}, expected one of {list(PRESETS)}")
    return CohortSpec.single(SkillProfile.from_config(state.config, preset), count or 1)


@app.command("synth")
@unwrap_typer_param
def cmd_synth(
    ctx: typer.Context,
    preset: str = typer.Option(PAPER_COHORT, help=f"One of {', '.join(PRESETS)}"),
    count: Optional[int] = typer.Option(None, help="Recordings for a single-class preset"),
    seed: Optional[int] = typer.Option(None, help="Master seed"),
    out: Optional[Path] = typer.Option(None, help="Store directory, defaults to the global --out"),
):
    """Generate synthetic raw recordings with metadata sidecars."""
    state = _state(ctx)
    seed = state.seed_for(seed, "synth")
    out = state.out_dir(out)
    banner("synth", preset=preset, count=count, seed=seed, out=out)
    with stage("synth"):
        recs = generate_cohort(_cohort(state, preset, count), seed)
        write_store(recs, out)
    typer.echo(f"synthesized {len(recs)} recordings into {out}")
    raise typer.Exit(code=EXIT_OK)


@app.command("report")
@unwrap_typer_param
def cmd_report(
    ctx: typer.Context,
    store: Path = typer.Argument(..., help="Store directory or manifest"),
    evaluation: Optional[List[Path]] = typer.Option(None, help="Evaluation JSON written by evaluate"),
    out: Optional[Path] = typer.Option(None, help="Output directory, defaults to the global --out"),
):
    """Analytics bundle, plus recognition-rate and confusion tables of past evaluations."""
    state = _state(ctx)
    section = config_section(state.config, "kinematics")
    out = state.out_dir(out)
    banner("report", store=store, evaluation=evaluation or [], out=out)
    warnings = []
    with stage("report"):
        recs = load_store(store, state.config)
        summary = write_analytics(recs, out, [marker_id(m) for m in section["report_markers"]],
                                  marker_id(section["correlation_marker"]), section["resample_n"], section["align"])
        reports = [r for path in evaluation or [] for r in read_evaluation(path)]
        if reports:
            write_evaluation(reports, out)
            typer.echo("\n".join(r.to_text() for r in reports))
    for notice in summary["notices"]:
        typer.echo(notice)
    warnings += [f"correlation skipped for {a} vs {b}: degenerate series" for a, b in summary["skipped_pairs"]]
    finish(warnings)


def _holdout_split(ds: Dataset, recs, n: int, marker, resample_n: int, align: str):
    """
    Training side: the n best-correlated recordings of each class, at least one
    recording per class left for evaluation. A class with fewer than two
    recordings has nothing to select from and goes to evaluation only.

    :return: training dataset, evaluation dataset, training subject ids, warnings.
    """
    train_ids, warnings = [], []
    for skill in ds.class_alphabet:
        members = [r for r in recs if r.skill == skill]
        if len(members) < 2:
            if members:
                warnings.append(f"{skill.value}: {len(members)} recording, kept for evaluation only")
            continue
        chosen, _ = select_training_recordings(recs, skill, min(n, len(members) - 1), marker, resample_n, align)
        train_ids += chosen
    in_train = np.array([subject in train_ids for subject in ds.groups])
    return ds.subset(np.flatnonzero(in_train)), ds.subset(np.flatnonzero(~in_train)), train_ids, warnings


@app.command("pipeline")
@unwrap_typer_param
def cmd_pipeline(
    ctx: typer.Context,
    manifest: Optional[Path] = typer.Argument(None, help="Manifest of raw recordings"),
    synth: Optional[str] = typer.Option(None, help=f"Synthesize input instead: {', '.join(PRESETS)}"),
    learner: Optional[str] = typer.Option(None, help="Learners, e.g. c45,nbtree"),
    no_prune: bool = typer.Option(False, "--no-prune", help="Skip C4.5 pruning"),
    min_leaf: Optional[int] = typer.Option(None, help="C4.5 minimum instances per branch"),
    folds: Optional[int] = typer.Option(None, help="Cross-validation folds"),
    group_by_recording: bool = typer.Option(False, help="Keep all windows of a recording in one fold"),
    holdout_class_experts: Optional[int] = typer.Option(
        None, help="Hold out all but the N best-correlated recordings of each class"),
    seed: Optional[int] = typer.Option(None, help="Seed for synthesis and fold assignment"),
    out: Optional[Path] = typer.Option(None, help="Output directory, defaults to the global --out"),
):
    """Ingest, window, train, cross-validate, hold out and report in one run."""
    state = _state(ctx)
    if (manifest is None) == (synth is None):
        raise typer.BadParameter("give either a manifest or --synth PRESET")
    out = state.out_dir(out)
    seed = seed if seed is not None else (state.seed if state.seed is not None
                                          else config_section(state.config, "evaluation")["seed"])
    names = _learner_names(state.config, learner)
    folds = folds or config_section(state.config, "evaluation")["folds"]
    kinematics = config_section(state.config, "kinematics")
    marker = marker_id(kinematics["correlation_marker"])
    banner("pipeline", manifest=manifest, synth=synth, learners=names, folds=folds, seed=seed,
           group_by_recording=group_by_recording, holdout_class_experts=holdout_class_experts, out=out)

    with stage("ingest"):
        policy = ValidationPolicy.from_config(state.config)
        if synth is not None:
            recs, findings = ingest_recordings(generate_cohort(_cohort(state, synth, None), seed), policy)
        else:
            recs, findings = ingest(read_manifest(manifest), policy, state.config)
        write_store(recs, out / "store")
    with stage("analyze"):
        summary = write_analytics(recs, out / "analytics", [marker_id(m) for m in kinematics["report_markers"]],
                                  marker, kinematics["resample_n"], kinematics["align"])
    with stage("windows"):
        spec = WindowSpec.from_config(state.config)
        ds = build_dataset(recs, spec, _classes(state.config, None))
        write_text(out / "dataset.csv", export_dataset(ds, provenance=True))
    holdout_warnings = []
    if holdout_class_experts is not None:
        with stage("hold-out split"):
            train, evaluation, train_ids, holdout_warnings = _holdout_split(
                ds, recs, holdout_class_experts, marker, kinematics["resample_n"], kinematics["align"])

    reports, models = [], {}
    for name in names:
        config = _learner(state, name, no_prune, min_leaf=min_leaf)
        with stage(f"train {name}"):
            models[name] = f"models/{name}.model"
            write_text(out / models[name], serialize_model(config.train(ds)))
        with stage(f"evaluate {name}"):
            report = kfold_cross_validate(ds, folds, config, seed, group_by_recording,
                                          n_jobs=config_section(state.config, "evaluation").get("n_jobs", 1),
                                          progress=not state.quiet)
            if holdout_class_experts is not None:
                report = report.combine(holdout_evaluate(train, evaluation, config))
        reports.append(report)

    with stage("report"):
        write_evaluation(reports, out / "reports")
        warnings = holdout_warnings + [w for r in reports for w in r.warnings]
        warnings += [f"correlation skipped for {a} vs {b}: degenerate series" for a, b in summary["skipped_pairs"]]
        run = {
            "seed": seed,
            "input": {"manifest": manifest, "synth": synth},
            "recordings": [r.subject_id for r in recs],
            "validation_findings": {subject: [f.message for f in found]
                                    for subject, found in findings.items() if found},
            "windows": {"window_len": spec.window_len, "overlap": spec.overlap, "differenced": spec.differenced,
                        "classes": ds.class_alphabet, "instances": len(ds)},
            "folds": folds,
            "group_by_recording": group_by_recording,
            "holdout_class_experts": holdout_class_experts,
            "models": models,
            "recognition_rates": {r.learner: {"cross_validation": r.recognition_rate_cv,
                                              "learning_data": r.recognition_rate_train,
                                              "evaluation_data": r.recognition_rate_eval} for r in reports},
            "warnings": warnings,
        }
        if holdout_class_experts is not None:
            run["holdout_training_recordings"] = train_ids
        write_text(out / "pipeline.json", dumps_json(run))
    typer.echo("\n".join(r.to_text() for r in reports))
    finish(warnings)

