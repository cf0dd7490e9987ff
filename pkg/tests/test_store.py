from __future__ import annotations

import pytest

from strokeminer.store import MANIFEST_NAME, ingest, ingest_recordings, load_store, read_manifest, write_store
from strokeminer.strokedata import ValidationPolicy, normalize_origin
from strokeminer.utils.error_util import ManifestError
from tests.helpers import linear_coords, make_recording


@pytest.fixture
def raw_recordings():
    return [
        make_recording(linear_coords(60, start=(120.5, 233.25)), subject_id="expert_1"),
        make_recording(linear_coords(30, step=(0.1, 0.3)), subject_id="novice_1", skill="novice"),
    ]


def test_store_round_trip(tmp_path, raw_recordings):
    manifest_path = write_store(raw_recordings, tmp_path / "store")
    assert manifest_path == tmp_path / "store" / MANIFEST_NAME
    assert manifest_path.read_text().splitlines() == [
        "recording,metadata",
        "expert_1.csv,expert_1.json",
        "novice_1.csv,novice_1.json",
    ]
    expected = [normalize_origin(r) for r in raw_recordings]
    assert load_store(tmp_path / "store") == expected
    assert load_store(manifest_path) == expected


def test_ingest_reports_findings_per_subject(tmp_path, raw_recordings):
    manifest = read_manifest(write_store(raw_recordings, tmp_path))
    recs, findings = ingest(manifest, ValidationPolicy())
    assert [r.subject_id for r in recs] == ["expert_1", "novice_1"]
    assert all(r.normalized for r in recs)
    assert findings["expert_1"] == []
    assert [str(f) for f in findings["novice_1"]] == ["Warning: frame count 30 < 40"]


def test_parsed_recordings_are_validated_like_a_manifest(tmp_path, raw_recordings):
    recs, findings = ingest_recordings(raw_recordings, ValidationPolicy())
    assert recs == [normalize_origin(r) for r in raw_recordings]
    from_manifest = ingest(read_manifest(write_store(raw_recordings, tmp_path)), ValidationPolicy())
    assert findings == from_manifest[1]


def test_manifest_paths_resolve_against_manifest_directory(tmp_path, raw_recordings):
    write_store(raw_recordings[:1], tmp_path / "data")
    (tmp_path / "index.csv").write_text("recording,metadata\ndata/expert_1.csv,data/expert_1.json\n")
    manifest = read_manifest(tmp_path / "index.csv")
    assert manifest.entries[0].recording == tmp_path / "data" / "expert_1.csv"
    assert load_store(tmp_path / "index.csv")[0].subject_id == "expert_1"


def test_duplicate_subject_ids_are_rejected(tmp_path, raw_recordings):
    write_store(raw_recordings[:1], tmp_path)
    (tmp_path / "dup.csv").write_text("recording,metadata\nexpert_1.csv,expert_1.json\nexpert_1.csv,expert_1.json\n")
    with pytest.raises(ManifestError, match="duplicate subject id expert_1"):
        load_store(tmp_path / "dup.csv")


def test_bad_manifests(tmp_path, raw_recordings):
    with pytest.raises(ManifestError):
        read_manifest(tmp_path / "nowhere.csv")
    (tmp_path / "bad.csv").write_text("csv,json\na.csv,a.json\n")
    with pytest.raises(ManifestError):
        read_manifest(tmp_path / "bad.csv")
    (tmp_path / "missing.csv").write_text("recording,metadata\ngone.csv,gone.json\n")
    with pytest.raises(ManifestError, match="missing file"):
        load_store(tmp_path / "missing.csv")
