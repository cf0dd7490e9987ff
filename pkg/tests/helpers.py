from __future__ import annotations

import numpy as np

from strokeminer.strokedata import N_MARKERS, StrokeRecording
from strokeminer.windowing import Dataset


def linear_coords(n_frames: int, start=(100.0, 200.0), step=(1.0, -0.5)) -> np.ndarray:
    """Every marker moves in a straight line; marker m is offset by 10 * (m - 1) px in x."""
    t = np.arange(n_frames, dtype=np.float64)[:, None, None]
    offsets = np.zeros((1, N_MARKERS, 2))
    offsets[0, :, 0] = 10.0 * np.arange(N_MARKERS)
    return np.asarray(start)[None, None, :] + offsets + t * np.asarray(step)[None, None, :]


def make_recording(coords, subject_id="s1", skill="expert", fps=90.0, normalized=False) -> StrokeRecording:
    return StrokeRecording(subject_id, skill, np.asarray(coords, dtype=np.float64), fps, normalized=normalized)


def make_dataset(X, labels, schema=None, classes=("expert", "novice"), sources=None) -> Dataset:
    """Labels may be abbreviated to E / N."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    schema = schema or tuple(f"a{i}" for i in range(X.shape[1]))
    labels = tuple({"E": "expert", "N": "novice"}.get(label, label) for label in labels)
    return Dataset(tuple(schema), tuple(classes), X, labels, sources)


def recording_csv(rows) -> str:
    """CSV text from (frame, 18 coordinates) rows."""
    header = "frame," + ",".join(f"m{m}_{a}" for m in range(1, 10) for a in "xy")
    lines = [header] + [",".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"
