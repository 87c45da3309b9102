"""CSV formats for trial data, statistic paths and evaluation tables.

Spike/trial files: header ``trial,bin_0,...,bin_{B-1}``, one row per
trial, trial ids starting at 1, comma separated, UTF-8.  Trial metadata
(bin width, change trial, cue bin, response) goes to a JSON sidecar
``<name>.meta.json`` next to the CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from neuroqcd.detectors import StoppingReport
from neuroqcd.simulate import Response, SpikeTrialSet


class DataFormatError(ValueError):
    """Malformed input data; the message names the offending line."""


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def _write(path: Path | None, text: str) -> None:
    if path is None:
        print(text, end="")
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def _rows_to_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def meta_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def trials_to_text(matrix: np.ndarray) -> str:
    matrix = np.asarray(matrix)
    header = ["trial"] + [f"bin_{j}" for j in range(matrix.shape[1])]
    rows = ([i + 1, *row] for i, row in enumerate(matrix.tolist()))
    return _rows_to_text(header, rows)


def write_spike_csv(trial_set: SpikeTrialSet, path: Path | None) -> None:
    _write(path, trials_to_text(trial_set.spikes.astype(int)))
    if path is not None:
        meta = {
            "bin_width": trial_set.bin_width,
            "change_trial": trial_set.change_trial,
            "cue_bin": trial_set.cue_bin,
            "response": str(trial_set.response),
        }
        meta_path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n",
                                   encoding="utf-8")


def read_trials_csv(path: Path) -> np.ndarray:
    """Trials x bins float matrix; raises :class:`DataFormatError` with line numbers."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"{path}: cannot read ({exc})") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError(f"{path}: empty file") from None
    expected = ["trial"] + [f"bin_{j}" for j in range(len(header) - 1)]
    if len(header) < 2 or [h.strip() for h in header] != expected:
        raise DataFormatError(f"{path}:1: header must be trial,bin_0,...,bin_{{B-1}}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
            )
        try:
            trial = int(row[0])
            values = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from None
        if trial != len(rows) + 1:
            raise DataFormatError(f"{path}:{lineno}: trial id {trial}, expected {len(rows) + 1}")
        if not all(math.isfinite(v) for v in values):
            raise DataFormatError(f"{path}:{lineno}: non-finite value")
        rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def read_spike_csv(path: Path) -> SpikeTrialSet:
    matrix = read_trials_csv(path)
    bad = np.argwhere((matrix != 0) & (matrix != 1))
    if bad.size:
        i, j = bad[0]
        raise DataFormatError(f"{path}:{i + 2}: bin_{j} is {matrix[i, j]!r}, expected 0 or 1")
    mp = meta_path(path)
    try:
        meta = json.loads(mp.read_text(encoding="utf-8")) if mp.exists() else {}
        if "response" in meta:
            meta["response"] = Response.parse(meta["response"])
        return SpikeTrialSet(matrix.astype(np.uint8), **meta)
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: inconsistent metadata ({exc})") from exc


def report_to_text(report: StoppingReport) -> str:
    rows = (
        (n, w, report.threshold, report.stopping_time == n)
        for n, w in enumerate(report.statistic_path.tolist(), start=1)
    )
    return _rows_to_text(["index", "statistic", "threshold", "stopped"], rows)


def write_report_csv(report: StoppingReport, path: Path | None) -> None:
    _write(path, report_to_text(report))


def table_to_text(items: Sequence, columns: Sequence[str] | None = None) -> str:
    """One CSV row per record; ``columns`` defaults to the dataclass fields."""
    if columns is None:
        columns = [f.name for f in fields(items[0])]
    return _rows_to_text(columns, ([getattr(it, c) for c in columns] for it in items))


def write_table_csv(items: Sequence, path: Path | None, columns: Sequence[str] | None = None) -> None:
    _write(path, table_to_text(items, columns))
