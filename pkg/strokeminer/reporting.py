"""
Report bundles written by the command line: kinematic analytics as CSV and
evaluation results as text, CSV and JSON. Nothing written here carries a timestamp.
"""
import json
import logging
from pathlib import Path
from typing import List, Sequence

from strokeminer.evaluation import EvaluationReport, rate_table
from strokeminer.kinematics import cohort_correlation, correlation_matrix, extrema_report, speed_table
from strokeminer.strokedata import StrokeRecording
from strokeminer.utils.data_util import dumps_json, write_text
from strokeminer.utils.error_util import FormatError, InsufficientData

log = logging.getLogger(__name__)


def _csv(frame) -> str:
    return frame.to_csv(index=False, lineterminator="\n")


def write_analytics(recs: Sequence[StrokeRecording], out_dir, markers, marker, resample_n: int = 100,
                    align: str = "time") -> dict:
    """
    Extrema table, speed profiles and trajectory correlations of a store.

    :return: summary with the written files, notices and the degenerate pairs left out.
    :raises InsufficientData: for an empty store.
    """
    if not recs:
        raise InsufficientData("the store holds no recordings")
    out_dir = Path(out_dir)
    summary = {"files": [], "notices": [], "skipped_pairs": []}

    table = extrema_report(recs, markers, by="class")
    summary["files"].append(write_text(out_dir / "extrema.csv", _csv(table.to_wide_frame())))
    per_recording = extrema_report(recs, markers, by="recording")
    summary["files"].append(write_text(out_dir / "extrema_by_recording.csv", _csv(per_recording.to_frame())))

    for rec in recs:
        if rec.n_frames >= 2:
            summary["files"].append(write_text(out_dir / "speed" / f"{rec.subject_id}.csv", _csv(speed_table(rec))))

    if len(recs) < 2:
        notice = "correlation matrix omitted: needs at least 2 recordings"
        log.warning(notice)
        summary["notices"].append(notice)
    else:
        matrix, skipped = correlation_matrix(recs, marker, resample_n, align)
        summary["files"].append(write_text(out_dir / "correlation.csv", _csv(matrix)))
        summary["files"].append(write_text(out_dir / "cohort_correlation.csv",
                                           _csv(cohort_correlation(recs, marker, resample_n, align))))
        summary["skipped_pairs"] = [list(pair) for pair in skipped]

    log.info(f"analytics for {len(recs)} recordings written to {out_dir}")
    return summary


def write_evaluation(reports: Sequence[EvaluationReport], out_dir, stem: str = "evaluation") -> List[Path]:
    """Rate table (text and CSV), confusion tables and the JSON document."""
    out_dir = Path(out_dir)
    text = "\n".join(report.to_text() for report in reports)
    return [
        write_text(out_dir / f"{stem}.txt", text),
        write_text(out_dir / f"{stem}_rates.csv", _csv(rate_table(reports))),
        write_text(out_dir / f"{stem}.json", dumps_json([report.to_dict() for report in reports])),
    ]


def read_evaluation(path) -> List[EvaluationReport]:
    """
    :raises FormatError: if the file is not an evaluation JSON document.
    """
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(document, dict):
            document = [document]
        return [EvaluationReport.from_dict(d) for d in document]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise FormatError(f"{path}: not an evaluation report: {e}", subexception=e)
