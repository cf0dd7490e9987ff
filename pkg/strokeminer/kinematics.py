"""
Per-marker kinematic analytics: speed profiles, x-extrema tables, trajectory
correlation between recordings, and impact detection.

Speeds are finite differences scaled by the frame rate, in pixels per second.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from strokeminer.strokedata import (
    RACKET_MARKERS,
    Axis,
    MarkerId,
    SkillClass,
    StrokeRecording,
    marker_id,
)
from strokeminer.utils.error_util import DegenerateSeries, InsufficientData, InvalidParameter

log = logging.getLogger(__name__)

ALIGNMENTS = ("time", "impact")


@dataclass(frozen=True, eq=False)
class SpeedSeries:
    marker: MarkerId
    axis: Axis
    values: np.ndarray


@dataclass(frozen=True)
class ExtremaRow:
    group: str
    marker: MarkerId
    min_x: float
    max_x: float


@dataclass(frozen=True)
class ExtremaTable:
    rows: Tuple[ExtremaRow, ...]

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per (group, marker)."""
        return pd.DataFrame(
            [(row.group, row.marker.label, row.min_x, row.max_x) for row in self.rows],
            columns=["group", "marker", "min_x", "max_x"],
        )

    def to_wide_frame(self) -> pd.DataFrame:
        """One row per group, a (min, max) column pair per marker, like the published table."""
        groups = list(dict.fromkeys(row.group for row in self.rows))
        markers = list(dict.fromkeys(row.marker for row in self.rows))
        wide = pd.DataFrame(index=pd.Index(groups, name="group"))
        for marker in markers:
            for column in ("min_x", "max_x"):
                wide[f"{marker.label}_{column[:3]}"] = np.nan
        for row in self.rows:
            wide.loc[row.group, f"{row.marker.label}_min"] = row.min_x
            wide.loc[row.group, f"{row.marker.label}_max"] = row.max_x
        return wide.reset_index()


@dataclass(frozen=True)
class CorrelationResult:
    r_x: float
    r_y: float
    n: int

    @property
    def mean(self) -> float:
        return (self.r_x + self.r_y) / 2


def _require_frames(rec: StrokeRecording, minimum: int = 2):
    if rec.n_frames < minimum:
        raise InsufficientData(f"{rec.subject_id}: {rec.n_frames} frame(s), need at least {minimum}")


def speed_series(rec: StrokeRecording, marker, axis) -> SpeedSeries:
    """
    Velocity of one coordinate: ``values[t] = (pos[t + 1] - pos[t]) * fps``.

    :raises InsufficientData: for fewer than 2 frames.
    """
    _require_frames(rec)
    marker, axis = marker_id(marker), Axis.parse(axis)
    values = np.diff(rec.series(marker, axis)) * rec.fps
    return SpeedSeries(marker, axis, values)


def speed_magnitude(rec: StrokeRecording, marker) -> np.ndarray:
    """2-D speed of one marker per frame interval, shape (frames - 1,)."""
    _require_frames(rec)
    return np.linalg.norm(np.diff(rec.marker(marker), axis=0), axis=1) * rec.fps


def speed_table(rec: StrokeRecording) -> pd.DataFrame:
    """Every marker's x/y velocity per interval plus the mean racket speed, for plotting."""
    _require_frames(rec)
    table = pd.DataFrame({"interval": np.arange(rec.n_frames - 1)})
    for marker in MarkerId:
        for axis in Axis:
            table[f"m{marker.value}_v{axis.label}"] = speed_series(rec, marker, axis).values
    table["racket_speed"] = racket_speed(rec)
    return table


def racket_speed(rec: StrokeRecording) -> np.ndarray:
    """Mean 2-D speed of the three racket markers per interval."""
    return np.mean([speed_magnitude(rec, m) for m in RACKET_MARKERS], axis=0)


def detect_impact(rec: StrokeRecording) -> int:
    """
    Index of the interval with the highest mean racket-marker speed.

    Ties go to the earliest index.

    :raises InsufficientData: for fewer than 2 frames.
    """
    _require_frames(rec)
    return int(np.argmax(racket_speed(rec)))


def extrema(rec: StrokeRecording, marker, axis) -> Tuple[float, float]:
    """Exact (min, max) of one coordinate series."""
    series = rec.series(marker, axis)
    return float(series.min()), float(series.max())


def extrema_report(recs: Sequence[StrokeRecording], markers: Iterable, by: str = "class") -> ExtremaTable:
    """
    Min of mins and max of maxes of the x coordinate, per group and marker.

    :param by: "class" groups recordings by skill (expert, intermediate, novice order);
        "recording" gives one group per subject in input order.
    :raises InsufficientData: when recs is empty.
    """
    if not recs:
        raise InsufficientData("extrema report needs at least one recording")
    markers = [marker_id(m) for m in markers]

    if by == "class":
        groups = [(skill.value, [r for r in recs if r.skill == skill]) for skill in SkillClass]
        groups = [(name, members) for name, members in groups if members]
    elif by == "recording":
        groups = [(r.subject_id, [r]) for r in recs]
    else:
        raise InvalidParameter(f"unknown grouping {by!r}")

    rows = []
    for name, members in groups:
        for marker in markers:
            bounds = [extrema(r, marker, Axis.X) for r in members]
            rows.append(ExtremaRow(name, marker, min(b[0] for b in bounds), max(b[1] for b in bounds)))
    return ExtremaTable(tuple(rows))


def resample_trajectory(rec: StrokeRecording, marker, n: int = 100, align: str = "time") -> np.ndarray:
    """
    Linearly resample one marker's trajectory to n points, shape (n, 2).

    ``align="time"`` spreads the n points over the recording's own duration.
    ``align="impact"`` resamples the stretch up to the impact frame onto the first
    n // 2 + 1 points and the rest onto the remaining points, so impacts of any two
    recordings land on the same index.
    """
    _require_frames(rec)
    if align not in ALIGNMENTS:
        raise InvalidParameter(f"unknown alignment {align!r}, expected one of {ALIGNMENTS}")
    minimum = 3 if align == "impact" else 2
    if n < minimum:
        raise InvalidParameter(f"resample_n must be >= {minimum}, got {n}")

    trajectory = rec.marker(marker)
    source = np.arange(rec.n_frames, dtype=np.float64)
    last = rec.n_frames - 1
    if align == "time":
        target = np.linspace(0.0, last, n)
    else:
        anchor = float(detect_impact(rec))
        half = n // 2
        target = np.concatenate([
            np.linspace(0.0, anchor, half + 1),
            np.linspace(anchor, last, n - half + 1)[1:],
        ])
    return np.column_stack([np.interp(target, source, trajectory[:, a]) for a in Axis])


def _pearson_per_axis(a: np.ndarray, b: np.ndarray, what: str) -> CorrelationResult:
    degenerate = [axis.label for axis in Axis
                  if np.all(a[:, axis] == a[0, axis]) or np.all(b[:, axis] == b[0, axis])]
    if degenerate:
        raise DegenerateSeries(f"{what}: zero variance on axis {', '.join(degenerate)}", axes=degenerate)
    r_x = stats.pearsonr(a[:, Axis.X], b[:, Axis.X])[0]
    r_y = stats.pearsonr(a[:, Axis.Y], b[:, Axis.Y])[0]
    return CorrelationResult(float(r_x), float(r_y), len(a))


def trajectory_correlation(rec_a: StrokeRecording, rec_b: StrokeRecording, marker,
                           resample_n: int = 100, align: str = "time") -> CorrelationResult:
    """
    Pearson correlation per axis between two recordings' trajectories of the same marker,
    after resampling both to resample_n points.

    :raises InsufficientData: if either recording has fewer than 2 frames.
    :raises DegenerateSeries: if a resampled series has zero variance.
    """
    a = resample_trajectory(rec_a, marker, resample_n, align)
    b = resample_trajectory(rec_b, marker, resample_n, align)
    return _pearson_per_axis(a, b, f"{rec_a.subject_id} vs {rec_b.subject_id}, marker {marker_id(marker).value}")


def marker_pair_correlation(rec: StrokeRecording, marker_a, marker_b) -> CorrelationResult:
    """Correlation per axis between two markers of the same recording."""
    _require_frames(rec)
    return _pearson_per_axis(rec.marker(marker_a), rec.marker(marker_b),
                             f"{rec.subject_id}, markers {marker_id(marker_a).value}/{marker_id(marker_b).value}")


def correlation_matrix(recs: Sequence[StrokeRecording], marker, resample_n: int = 100,
                       align: str = "time") -> Tuple[pd.DataFrame, List[Tuple[str, str]]]:
    """
    Trajectory correlation of every recording pair, in input order.

    :return: the table (subject_a, subject_b, skill_a, skill_b, r_x, r_y, r_mean) and
        the pairs left out because a series was degenerate.
    """
    rows, skipped = [], []
    for rec_a, rec_b in itertools.combinations(recs, 2):
        try:
            result = trajectory_correlation(rec_a, rec_b, marker, resample_n, align)
        except DegenerateSeries as e:
            log.warning(f"correlation skipped: {e.message}")
            skipped.append((rec_a.subject_id, rec_b.subject_id))
            continue
        rows.append((rec_a.subject_id, rec_b.subject_id, rec_a.skill.value, rec_b.skill.value,
                     result.r_x, result.r_y, result.mean))
    table = pd.DataFrame(rows, columns=["subject_a", "subject_b", "skill_a", "skill_b", "r_x", "r_y", "r_mean"])
    return table, skipped


def cohort_correlation(recs: Sequence[StrokeRecording], marker, resample_n: int = 100,
                       align: str = "time") -> pd.DataFrame:
    """
    Mean pairwise trajectory correlation within each skill class.

    Classes with fewer than two recordings get NaN coefficients.
    """
    rows = []
    for skill in SkillClass:
        members = [r for r in recs if r.skill == skill]
        if not members:
            continue
        table, _ = correlation_matrix(members, marker, resample_n, align)
        if len(table):
            rows.append((skill.value, len(members), len(table),
                         table["r_x"].mean(), table["r_y"].mean(), table["r_mean"].mean()))
        else:
            rows.append((skill.value, len(members), 0, np.nan, np.nan, np.nan))
    return pd.DataFrame(rows, columns=["skill", "n_recordings", "n_pairs", "r_x", "r_y", "r_mean"])
