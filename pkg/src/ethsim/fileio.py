"""Plain-text file formats and atomic writers.

Matrix files: first line is the dimension, then one row per line as
whitespace-separated "re im" pairs, row-major. Series files: CSV with
columns step,t,sample,running_mean,running_se (or the JSON equivalent).
Floats are written with repr so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError

SERIES_COLUMNS = ("step", "t", "sample", "running_mean", "running_se")


def atomic_write_text(path, text: str) -> Path:
    """Write via a sibling temp file and rename, so readers never see a
    half-written file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_matrix_file(path, entries) -> Path:
    entries = np.asarray(entries, dtype=complex)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ConfigError(f"matrix must be square, got shape {entries.shape}")
    dim = entries.shape[0]
    lines = [str(dim)]
    for row in entries:
        # plain-float repr: numpy scalar reprs are not parseable numbers
        lines.append(" ".join(f"{float(x.real)!r} {float(x.imag)!r}" for x in row))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_matrix_file(path) -> np.ndarray:
    path = Path(path)
    try:
        tokens = path.read_text().split()
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc
    if not tokens:
        raise ConfigError(f"matrix file {path} is empty")
    try:
        dim = int(tokens[0])
    except ValueError:
        raise ConfigError(f"matrix file {path}: first token must be the dimension")
    expect = 1 + 2 * dim * dim
    if dim < 1 or len(tokens) != expect:
        raise ConfigError(
            f"matrix file {path}: expected {expect} numbers for dim {dim}, got {len(tokens)}"
        )
    try:
        flat = np.asarray([float(t) for t in tokens[1:]])
    except ValueError as exc:
        raise ConfigError(f"matrix file {path}: non-numeric entry ({exc})") from exc
    pairs = flat.reshape(dim * dim, 2)
    return (pairs[:, 0] + 1.0j * pairs[:, 1]).reshape(dim, dim)


def _series_rows(dt: float, series, running_mean_col, running_se_col):
    dt = float(dt)
    for j in range(len(series)):
        step = j + 1
        yield step, step * dt, float(series[j]), float(running_mean_col[j]), float(
            running_se_col[j]
        )


def series_csv_text(dt: float, series, running_mean_col, running_se_col) -> str:
    lines = [",".join(SERIES_COLUMNS)]
    for step, t, sample, rm, se in _series_rows(dt, series, running_mean_col, running_se_col):
        lines.append(f"{step},{t!r},{sample!r},{rm!r},{se!r}")
    return "\n".join(lines) + "\n"


def series_json_text(dt: float, series, running_mean_col, running_se_col) -> str:
    rows = [
        [step, t, sample, rm, se]
        for step, t, sample, rm, se in _series_rows(dt, series, running_mean_col, running_se_col)
    ]
    payload = {"schema_version": 1, "columns": list(SERIES_COLUMNS), "rows": rows}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_series(path, fmt: str, dt: float, series, running_mean_col, running_se_col) -> Path:
    if fmt == "csv":
        text = series_csv_text(dt, series, running_mean_col, running_se_col)
    elif fmt == "json":
        text = series_json_text(dt, series, running_mean_col, running_se_col)
    else:
        raise ConfigError(f"unknown series format {fmt!r}")
    return atomic_write_text(path, text)


def write_summary(path, summary: dict) -> Path:
    return atomic_write_text(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")


def read_summary(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read summary file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"summary file {path} is not valid JSON: {exc}") from exc
