"""
Domain types for forehand stroke recordings.

A recording holds the digitized 2-D positions of the 9 arm and racket markers for
every frame of one stroke, plus the subject metadata kept in a JSON sidecar.

Recording CSV::

    frame,m1_x,m1_y,m2_x,m2_y,...,m9_x,m9_y
    0,100.0,200.0,...

Sidecar JSON::

    {"subject_id": "expert_1", "skill": "expert", "fps": 90, "resolution": [512, 512]}
"""
import dataclasses
import enum
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from strokeminer.utils.config_util import config_section
from strokeminer.utils.data_util import dumps_json
from strokeminer.utils.error_util import (
    FormatError,
    InvalidParameter,
    ManifestError,
    NonFiniteValueError,
    SequenceError,
)

log = logging.getLogger(__name__)

N_MARKERS = 9
DEFAULT_FPS = 90.0
DEFAULT_RESOLUTION = (512, 512)


class MarkerId(enum.IntEnum):
    """The 9 marking points on the right arm and racket."""
    ACROMIOCLAVICULAR_JOINT = 1
    ACROMIALE = 2
    RADIALE = 3
    ULNA = 4
    STYLIUM = 5
    STYLIUM_ULNAE = 6
    RACKET_INNER_SIDE = 7
    RACKET_OUTER_SIDE = 8
    RACKET_TOP = 9

    @property
    def label(self):
        return f"M{self.value}"


RACKET_MARKERS = (MarkerId.RACKET_INNER_SIDE, MarkerId.RACKET_OUTER_SIDE, MarkerId.RACKET_TOP)


class Axis(enum.IntEnum):
    X = 0
    Y = 1

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                pass
        raise InvalidParameter(f"unknown axis {value!r}, expected 'x' or 'y'")

    @property
    def label(self):
        return self.name.lower()


class SkillClass(str, enum.Enum):
    """Skill levels, declared in report order."""
    EXPERT = "expert"
    INTERMEDIATE = "intermediate"
    NOVICE = "novice"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidParameter(f"unknown skill class {value!r}")

    @classmethod
    def ordered(cls, classes: Iterable) -> Tuple["SkillClass", ...]:
        """Deduplicate classes and put them in canonical order (expert, intermediate, novice)."""
        wanted = {cls.parse(c) for c in classes}
        return tuple(c for c in cls if c in wanted)

    def __str__(self):
        return self.value


def marker_id(value) -> MarkerId:
    """Accept 9, "9", "m9" or "M9"."""
    if isinstance(value, MarkerId):
        return value
    text = str(value).strip().lower().lstrip("m")
    try:
        return MarkerId(int(text))
    except ValueError:
        raise InvalidParameter(f"unknown marker {value!r}, expected 1..9")


def coordinate_columns() -> List[str]:
    return [f"m{m}_{axis.label}" for m in MarkerId for axis in Axis]


CSV_HEADER = ["frame"] + coordinate_columns()


@dataclass(frozen=True, eq=False)
class Frame:
    """One frame: index within the recording and the (9, 2) marker positions."""
    index: int
    positions: np.ndarray

    def position(self, marker) -> Tuple[float, float]:
        x, y = self.positions[marker_id(marker) - 1]
        return float(x), float(y)


@dataclass(frozen=True)
class RecordingMetadata:
    subject_id: str
    skill: SkillClass
    fps: float = DEFAULT_FPS
    resolution: Tuple[int, int] = DEFAULT_RESOLUTION

    def __post_init__(self):
        object.__setattr__(self, "skill", SkillClass.parse(self.skill))
        object.__setattr__(self, "fps", float(self.fps))
        object.__setattr__(self, "resolution", tuple(int(v) for v in self.resolution))
        if not self.subject_id:
            raise InvalidParameter("subject_id must not be empty")
        if not np.isfinite(self.fps) or self.fps <= 0:
            raise InvalidParameter(f"fps must be positive, got {self.fps}")
        if len(self.resolution) != 2:
            raise InvalidParameter(f"resolution must be [width, height], got {self.resolution}")

    @classmethod
    def from_json(cls, text: str, config: Optional[dict] = None) -> "RecordingMetadata":
        """
        Parse a sidecar. fps and resolution fall back to the "recording" config section.

        :raises FormatError: on invalid JSON, missing keys or bad values.
        """
        defaults = config_section(config or {}, "recording")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(f"sidecar is not valid JSON: {e}", subexception=e)
        if not isinstance(data, dict):
            raise FormatError("sidecar must be a JSON object")
        missing = [key for key in ("subject_id", "skill") if key not in data]
        if missing:
            raise FormatError(f"sidecar lacks {', '.join(missing)}")
        try:
            return cls(
                subject_id=str(data["subject_id"]),
                skill=data["skill"],
                fps=data.get("fps", defaults.get("fps", DEFAULT_FPS)),
                resolution=data.get("resolution", defaults.get("resolution", DEFAULT_RESOLUTION)),
            )
        except InvalidParameter as e:
            raise FormatError(f"sidecar: {e.message}", subexception=e)

    def to_json(self) -> str:
        return dumps_json({
            "subject_id": self.subject_id,
            "skill": self.skill.value,
            "fps": self.fps,
            "resolution": list(self.resolution),
        })


@dataclass(frozen=True, eq=False)
class StrokeRecording:
    """
    One subject's stroke.

    ``coords`` has shape (frames, 9, 2) and is read-only; frame t of the
    recording is ``coords[t]`` and marker m (1-based) is ``coords[:, m - 1]``.
    """
    subject_id: str
    skill: SkillClass
    coords: np.ndarray
    fps: float = DEFAULT_FPS
    resolution: Tuple[int, int] = DEFAULT_RESOLUTION
    normalized: bool = False

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64)
        if coords.ndim != 3 or coords.shape[1:] != (N_MARKERS, 2):
            raise InvalidParameter(f"coords must have shape (frames, 9, 2), got {coords.shape}")
        if coords.shape[0] == 0:
            raise InvalidParameter(f"recording {self.subject_id} has no frames")
        if not np.all(np.isfinite(coords)):
            raise NonFiniteValueError(f"recording {self.subject_id} has non-finite coordinates")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "skill", SkillClass.parse(self.skill))
        object.__setattr__(self, "fps", float(self.fps))
        object.__setattr__(self, "resolution", tuple(int(v) for v in self.resolution))
        if self.normalized and not np.array_equal(coords[0, 0], (0.0, 0.0)):
            raise InvalidParameter(f"recording {self.subject_id} is flagged normalized but marker 1 "
                                   f"of frame 0 is {tuple(coords[0, 0])}")

    def __eq__(self, other):
        if not isinstance(other, StrokeRecording):
            return NotImplemented
        return (self.metadata == other.metadata
                and self.normalized == other.normalized
                and np.array_equal(self.coords, other.coords))

    __hash__ = None

    @classmethod
    def from_metadata(cls, metadata: RecordingMetadata, coords, normalized=False):
        return cls(metadata.subject_id, metadata.skill, coords, metadata.fps, metadata.resolution, normalized)

    @property
    def metadata(self) -> RecordingMetadata:
        return RecordingMetadata(self.subject_id, self.skill, self.fps, self.resolution)

    @property
    def n_frames(self) -> int:
        return self.coords.shape[0]

    @property
    def frames(self) -> Tuple[Frame, ...]:
        return tuple(Frame(t, self.coords[t]) for t in range(self.n_frames))

    def marker(self, marker) -> np.ndarray:
        """Trajectory of one marker, shape (frames, 2)."""
        return self.coords[:, marker_id(marker) - 1]

    def series(self, marker, axis) -> np.ndarray:
        """One coordinate of one marker over time, shape (frames,)."""
        return self.coords[:, marker_id(marker) - 1, Axis.parse(axis)]


def parse_recording(csv_text: str, metadata: RecordingMetadata) -> StrokeRecording:
    """
    Parse a recording CSV.

    Rows may come in any order; frame indices are sorted and must then read
    exactly 0, 1, ..., T-1. Row numbers in messages count data rows from 1.

    :param csv_text: The CSV text, header ``frame,m1_x,m1_y,...,m9_y``.
    :param metadata: The sidecar contents.
    :raises FormatError: on a malformed header, no data rows or non-integer frame indices.
    :raises SequenceError: on duplicate or missing frame indices.
    :raises NonFiniteValueError: on a missing, non-numeric or non-finite coordinate.
    """
    try:
        df = pd.read_csv(io.StringIO(csv_text), float_precision="round_trip", skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise FormatError("recording CSV is empty", subexception=e)
    except pd.errors.ParserError as e:
        raise FormatError(f"recording CSV cannot be parsed: {e}", subexception=e)

    header = [str(c).strip() for c in df.columns]
    if header != CSV_HEADER:
        raise FormatError(f"recording CSV header must be {','.join(CSV_HEADER)}; got {','.join(header)}")
    if len(df) == 0:
        raise FormatError("recording CSV has no data rows")

    frame_numbers = pd.to_numeric(df["frame"], errors="coerce").to_numpy(dtype=np.float64)
    bad_frames = ~np.isfinite(frame_numbers) | (frame_numbers != np.round(frame_numbers))
    if bad_frames.any():
        row = int(np.argmax(bad_frames))
        raise FormatError(f"row {row + 1}, frame: {df['frame'].iloc[row]!r} is not an integer frame index")

    columns = coordinate_columns()
    values = df[columns].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    invalid = ~np.isfinite(values)
    if invalid.any():
        row, col = np.argwhere(invalid)[0]
        raw = df[columns[col]].iloc[row]
        raise NonFiniteValueError(f"row {row + 1}, {columns[col]}: {raw!r} is not a finite number")

    frame_numbers = frame_numbers.astype(np.int64)
    order = np.argsort(frame_numbers, kind="stable")
    for position, row in enumerate(order):
        if frame_numbers[row] != position:
            raise SequenceError(f"row {row + 1}: frame index {frame_numbers[row]} breaks the sequence "
                                f"0..{len(order) - 1} (expected {position})")

    coords = values[order].reshape(len(order), N_MARKERS, 2)
    return StrokeRecording.from_metadata(metadata, coords, normalized=False)


def serialize_recording(rec: StrokeRecording) -> str:
    """Write a recording in the CSV format read by parse_recording (shortest round-trip floats)."""
    df = pd.DataFrame(rec.coords.reshape(rec.n_frames, 2 * N_MARKERS), columns=coordinate_columns())
    df.insert(0, "frame", np.arange(rec.n_frames, dtype=np.int64))
    return df.to_csv(index=False, lineterminator="\n")


def load_recording(csv_path, sidecar_path, config: Optional[dict] = None) -> StrokeRecording:
    """
    Read a recording CSV and its metadata sidecar.

    :raises ManifestError: if either file is missing.
    """
    texts = []
    for path in (Path(csv_path), Path(sidecar_path)):
        try:
            texts.append(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ManifestError(f"missing file {path}", subexception=e)
    metadata = RecordingMetadata.from_json(texts[1], config)
    return parse_recording(texts[0], metadata)


def normalize_origin(rec: StrokeRecording) -> StrokeRecording:
    """
    Translate every coordinate so that marker 1 of frame 0 (the shoulder) is (0, 0).

    Already normalized recordings are returned unchanged.
    """
    if rec.normalized:
        return rec
    origin = rec.coords[0, MarkerId.ACROMIOCLAVICULAR_JOINT - 1]
    return dataclasses.replace(rec, coords=rec.coords - origin, normalized=True)


@dataclass(frozen=True)
class ValidationPolicy:
    min_frames: int = 40
    max_frames: int = 120
    expected_fps: float = DEFAULT_FPS
    max_jump: float = 150.0

    @classmethod
    def from_config(cls, config: dict) -> "ValidationPolicy":
        return cls(**config_section(config, "validation"))


@dataclass(frozen=True)
class Finding:
    """An advisory warning about a recording."""
    kind: str
    message: str
    frame: Optional[int] = None
    marker: Optional[int] = None

    def __str__(self):
        return f"Warning: {self.message}"


def validate_recording(rec: StrokeRecording, policy: Optional[ValidationPolicy] = None) -> List[Finding]:
    """
    Check a recording against the expected capture conditions.

    Jumps are reported at the frame a marker jumped to: a displacement larger than
    ``policy.max_jump`` between frames k-1 and k gives a finding at frame k.

    :return: The findings; empty when the recording is clean.
    """
    policy = policy or ValidationPolicy()
    findings = []

    n = rec.n_frames
    if n < policy.min_frames:
        findings.append(Finding("frame_count", f"frame count {n} < {policy.min_frames}"))
    elif n > policy.max_frames:
        findings.append(Finding("frame_count", f"frame count {n} > {policy.max_frames}"))

    if not np.isclose(rec.fps, policy.expected_fps):
        findings.append(Finding("fps", f"fps {rec.fps:g} != {policy.expected_fps:g}"))

    if n >= 2:
        jumps = np.linalg.norm(np.diff(rec.coords, axis=0), axis=2)
        for k, m in np.argwhere(jumps > policy.max_jump):
            findings.append(Finding(
                "jump",
                f"jump at frame {k + 1}, marker {m + 1}: {jumps[k, m]:.1f} px > {policy.max_jump:g} px",
                frame=int(k + 1),
                marker=int(m + 1),
            ))

    for finding in findings:
        log.warning(f"{rec.subject_id}: {finding.message}")
    return findings
