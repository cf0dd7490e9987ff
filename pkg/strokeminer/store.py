"""
Recording stores: a directory of canonical ``<subject>.csv`` / ``<subject>.json``
pairs indexed by a ``manifest.csv``.

A manifest is a CSV with the header ``recording,metadata``; relative paths are
resolved against the manifest's own directory.
"""
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from strokeminer.strokedata import (
    StrokeRecording,
    ValidationPolicy,
    load_recording,
    normalize_origin,
    serialize_recording,
    validate_recording,
)
from strokeminer.utils.data_util import write_text
from strokeminer.utils.error_util import ManifestError

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = ["recording", "metadata"]


@dataclass(frozen=True)
class ManifestEntry:
    recording: Path
    metadata: Path


@dataclass(frozen=True)
class Manifest:
    entries: Tuple[ManifestEntry, ...]

    def __len__(self):
        return len(self.entries)

    def to_csv(self, base: Optional[Path] = None) -> str:
        def rel(path: Path) -> str:
            if base is not None:
                try:
                    return path.relative_to(base).as_posix()
                except ValueError:
                    pass
            return path.as_posix()
        df = pd.DataFrame([(rel(e.recording), rel(e.metadata)) for e in self.entries], columns=MANIFEST_COLUMNS)
        return df.to_csv(index=False, lineterminator="\n")


def read_manifest(path) -> Manifest:
    """
    :raises ManifestError: if the manifest is missing or lacks the two columns.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ManifestError(f"missing manifest {path}", subexception=e)
    try:
        df = pd.read_csv(io.StringIO(text), dtype=str, skipinitialspace=True)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise ManifestError(f"{path}: cannot parse manifest: {e}", subexception=e)
    if list(df.columns) != MANIFEST_COLUMNS:
        raise ManifestError(f"{path}: manifest header must be {','.join(MANIFEST_COLUMNS)}")
    base = path.parent
    entries = tuple(ManifestEntry(base / rec, base / meta) for rec, meta in df.itertuples(index=False))
    return Manifest(entries)


def load_manifest(manifest: Manifest, config: Optional[dict] = None) -> List[StrokeRecording]:
    """
    Parse every entry of a manifest.

    :raises ManifestError: on a missing file or a duplicate subject id.
    """
    recs, seen = [], set()
    for entry in manifest.entries:
        rec = load_recording(entry.recording, entry.metadata, config)
        if rec.subject_id in seen:
            raise ManifestError(f"duplicate subject id {rec.subject_id} ({entry.recording})")
        seen.add(rec.subject_id)
        recs.append(rec)
    return recs


def ingest_recordings(recs: Iterable[StrokeRecording], policy: Optional[ValidationPolicy] = None
                      ) -> Tuple[List[StrokeRecording], dict]:
    """
    Validate and normalize parsed recordings.

    :return: the normalized recordings and the findings per subject.
    """
    out, findings = [], {}
    for rec in recs:
        findings[rec.subject_id] = validate_recording(rec, policy)
        out.append(normalize_origin(rec))
    return out, findings


def ingest(manifest: Manifest, policy: Optional[ValidationPolicy] = None,
           config: Optional[dict] = None) -> Tuple[List[StrokeRecording], dict]:
    """
    Parse, validate and normalize every recording of a manifest.

    :return: the normalized recordings and the findings per subject.
    """
    return ingest_recordings(load_manifest(manifest, config), policy)


def write_store(recs: Sequence[StrokeRecording], out_dir) -> Path:
    """
    Write recordings in canonical form plus a manifest.

    :return: path of the written manifest.
    """
    out_dir = Path(out_dir)
    entries = []
    for rec in recs:
        csv_path = write_text(out_dir / f"{rec.subject_id}.csv", serialize_recording(rec))
        json_path = write_text(out_dir / f"{rec.subject_id}.json", rec.metadata.to_json())
        entries.append(ManifestEntry(csv_path, json_path))
    manifest_path = write_text(out_dir / MANIFEST_NAME, Manifest(tuple(entries)).to_csv(out_dir))
    log.info(f"stored {len(entries)} recordings in {out_dir}")
    return manifest_path


def load_store(path, config: Optional[dict] = None) -> List[StrokeRecording]:
    """
    Read a store directory or a manifest file; recordings come back normalized.
    """
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    return [normalize_origin(rec) for rec in load_manifest(read_manifest(path), config)]
