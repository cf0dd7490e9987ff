"""
Reconstruction of recordings into overlapping fixed-width feature windows.

A window of ``window_len`` consecutive frames is flattened frame-major, then by
marker, then by axis::

    index = t * 18 + (m - 1) * 2 + a        a = 0 for x, 1 for y

With the default 5-frame windows that is 90 features, named ``m{m}_{x|y}_t{t}``.
Consecutive windows share ``overlap`` frames; trailing frames that cannot fill
a window are dropped.
"""
import io
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import more_itertools
import numpy as np
import pandas as pd

from strokeminer.strokedata import N_MARKERS, Axis, MarkerId, SkillClass, StrokeRecording
from strokeminer.utils.config_util import config_section
from strokeminer.utils.error_util import (
    EmptyDataset,
    FormatError,
    InsufficientData,
    InvalidParameter,
    SchemaError,
)

log = logging.getLogger(__name__)

FEATURES_PER_FRAME = N_MARKERS * 2
CLASS_COLUMN = "class"
PROVENANCE_COLUMNS = ["subject", "start_frame"]


@dataclass(frozen=True)
class WindowSpec:
    window_len: int = 5
    overlap: int = 3
    differenced: bool = False

    def __post_init__(self):
        if self.window_len < 1 or not 0 <= self.overlap < self.window_len:
            raise InvalidParameter(f"need 0 <= overlap < window_len, got window_len={self.window_len}, "
                                   f"overlap={self.overlap}")

    @property
    def stride(self) -> int:
        return self.window_len - self.overlap

    @property
    def n_features(self) -> int:
        return self.window_len * FEATURES_PER_FRAME

    @classmethod
    def from_config(cls, config: dict) -> "WindowSpec":
        section = config_section(config, "windowing")
        section.pop("classes", None)
        return cls(**section)

    def schema(self) -> Tuple[str, ...]:
        prefix = "d_" if self.differenced else ""
        return tuple(f"{prefix}m{m.value}_{a.label}_t{t}"
                     for t in range(self.window_len) for m in MarkerId for a in Axis)

    def window_count(self, n_frames: int) -> int:
        usable = n_frames - 1 if self.differenced else n_frames
        if usable < self.window_len:
            return 0
        return (usable - self.window_len) // self.stride + 1


@dataclass(frozen=True, eq=False)
class FeatureWindow:
    features: np.ndarray
    label: SkillClass
    source: Optional[Tuple[str, int]] = None


def make_windows(rec: StrokeRecording, spec: Optional[WindowSpec] = None) -> List[FeatureWindow]:
    """
    Cut a normalized recording into windows starting at frames 0, stride, 2 * stride, ...

    :raises InvalidParameter: if the recording is not normalized.
    :raises InsufficientData: if it has fewer frames than one window needs.
    """
    spec = spec or WindowSpec()
    if not rec.normalized:
        raise InvalidParameter(f"{rec.subject_id}: recordings must be normalized before windowing")

    frames = np.diff(rec.coords, axis=0) if spec.differenced else rec.coords
    if len(frames) < spec.window_len:
        raise InsufficientData(f"{rec.subject_id}: {rec.n_frames} frames cannot fill a "
                               f"{spec.window_len}-frame window")

    windows = []
    for span in more_itertools.windowed(range(len(frames)), spec.window_len, step=spec.stride):
        if span[-1] is None:
            # partial trailing window
            break
        start = span[0]
        features = frames[start:start + spec.window_len].reshape(-1).copy()
        features.setflags(write=False)
        windows.append(FeatureWindow(features, rec.skill, (rec.subject_id, start)))
    return windows


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Windows sharing one attribute schema and class alphabet.

    ``X`` has shape (instances, attributes); ``labels`` and ``sources`` align with
    its rows. ``sources`` is None for datasets imported without provenance.
    """
    schema: Tuple[str, ...]
    class_alphabet: Tuple[SkillClass, ...]
    X: np.ndarray
    labels: Tuple[SkillClass, ...]
    sources: Optional[Tuple[Tuple[str, int], ...]] = None

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        if X.ndim != 2:
            X = X.reshape(len(self.labels), len(self.schema))
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "class_alphabet", tuple(SkillClass.parse(c) for c in self.class_alphabet))
        object.__setattr__(self, "labels", tuple(SkillClass.parse(c) for c in self.labels))
        if self.sources is not None:
            object.__setattr__(self, "sources", tuple((str(s), int(f)) for s, f in self.sources))

        if X.shape != (len(self.labels), len(self.schema)):
            raise SchemaError(f"feature matrix {X.shape} does not match {len(self.labels)} labels "
                              f"x {len(self.schema)} attributes")
        if not self.class_alphabet:
            raise SchemaError("class alphabet is empty")
        stray = sorted({c.value for c in self.labels} - {c.value for c in self.class_alphabet})
        if stray:
            raise SchemaError(f"labels {stray} are not in the class alphabet")
        if self.sources is not None and len(self.sources) != len(self.labels):
            raise SchemaError("provenance does not align with instances")

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.schema == other.schema and self.class_alphabet == other.class_alphabet
                and self.labels == other.labels and self.sources == other.sources
                and np.array_equal(self.X, other.X))

    __hash__ = None

    def __len__(self):
        return len(self.labels)

    @property
    def y(self) -> np.ndarray:
        """Labels as indices into class_alphabet."""
        index = {c: i for i, c in enumerate(self.class_alphabet)}
        return np.array([index[c] for c in self.labels], dtype=np.int64)

    @property
    def groups(self) -> Optional[Tuple[str, ...]]:
        if self.sources is None:
            return None
        return tuple(subject for subject, _ in self.sources)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=len(self.class_alphabet))

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        sources = None if self.sources is None else tuple(self.sources[i] for i in indices)
        return Dataset(self.schema, self.class_alphabet, self.X[indices],
                       tuple(self.labels[i] for i in indices), sources)

    def same_schema(self, other: "Dataset") -> bool:
        return self.schema == other.schema and self.class_alphabet == other.class_alphabet


def build_dataset(recs: Sequence[StrokeRecording], spec: Optional[WindowSpec] = None,
                  classes: Iterable = (SkillClass.EXPERT, SkillClass.NOVICE)) -> Dataset:
    """
    Concatenate the windows of every recording whose skill is in ``classes``, in input order.

    :raises InvalidParameter: if classes is empty.
    :raises EmptyDataset: if no window survives.
    """
    spec = spec or WindowSpec()
    alphabet = SkillClass.ordered(classes)
    if not alphabet:
        raise InvalidParameter("at least one class is required")

    rows, labels, sources = [], [], []
    for rec in recs:
        if rec.skill not in alphabet:
            log.info(f"{rec.subject_id}: skill {rec.skill.value} not in {[c.value for c in alphabet]}, excluded")
            continue
        for window in make_windows(rec, spec):
            rows.append(window.features)
            labels.append(window.label)
            sources.append(window.source)

    if not rows:
        raise EmptyDataset(f"no windows for classes {[c.value for c in alphabet]}")
    log.info(f"dataset: {len(rows)} windows x {spec.n_features} attributes")
    return Dataset(spec.schema(), alphabet, np.vstack(rows), tuple(labels), tuple(sources))


def export_dataset(ds: Dataset, provenance: bool = False) -> str:
    """
    Dataset CSV: the schema names, then ``class``; with provenance, also ``subject,start_frame``.

    :raises EmptyDataset: for a dataset without instances.
    """
    if len(ds) == 0:
        raise EmptyDataset("nothing to export")
    df = pd.DataFrame(ds.X, columns=list(ds.schema))
    df[CLASS_COLUMN] = [c.value for c in ds.labels]
    if provenance:
        if ds.sources is None:
            raise SchemaError("dataset carries no provenance")
        df[PROVENANCE_COLUMNS[0]] = [s for s, _ in ds.sources]
        df[PROVENANCE_COLUMNS[1]] = [f for _, f in ds.sources]
    return df.to_csv(index=False, lineterminator="\n")


def import_dataset(text: str, classes: Optional[Iterable] = None) -> Dataset:
    """
    Read a dataset CSV written by export_dataset.

    :param classes: the class alphabet; defaults to the classes present, in canonical order.
    :raises FormatError: on a missing class column or non-numeric features.
    """
    try:
        df = pd.read_csv(io.StringIO(text), float_precision="round_trip", dtype={CLASS_COLUMN: str})
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise FormatError(f"dataset CSV cannot be parsed: {e}", subexception=e)

    columns = list(df.columns)
    has_provenance = columns[-2:] == PROVENANCE_COLUMNS
    if has_provenance:
        columns = columns[:-2]
    if not columns or columns[-1] != CLASS_COLUMN:
        raise FormatError(f"dataset CSV must end with a '{CLASS_COLUMN}' column")
    schema = columns[:-1]
    if not schema:
        raise FormatError("dataset CSV has no attribute columns")

    features = df[schema].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(features)):
        row, col = np.argwhere(~np.isfinite(features))[0]
        raise FormatError(f"row {row + 1}, {schema[col]}: not a finite number")

    try:
        labels = tuple(SkillClass.parse(c) for c in df[CLASS_COLUMN])
        alphabet = SkillClass.ordered(classes if classes is not None else labels)
    except InvalidParameter as e:
        raise FormatError(e.message, subexception=e)
    sources = None
    if has_provenance:
        sources = tuple(zip(df["subject"].astype(str), df["start_frame"].astype(np.int64)))
    return Dataset(tuple(schema), alphabet, features, labels, sources)
