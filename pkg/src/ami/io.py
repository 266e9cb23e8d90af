"""CSV/JSON interchange: sample ingestion, density export, result dumps.

Samples travel as RFC-4180 CSV with a required header row; results are UTF-8
snake_case JSON.  Parse failures carry the offending row so the CLI can name
it in the error message.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .grid import DensityEstimate

__all__ = [
    "CsvParseError",
    "SampleValidationError",
    "read_sample_csv",
    "write_sample_csv",
    "export_density_csv",
    "write_json",
    "write_null_stats_csv",
]


class CsvParseError(ValueError):
    """A cell failed to parse as a number; carries the 1-based file line."""

    def __init__(self, message: str, line: int):
        super().__init__(message)
        self.line = line


class SampleValidationError(ValueError):
    """The file parsed but the requested sample is unusable."""


def _resolve_column(name: str, header: list[str]) -> int:
    if name in header:
        return header.index(name)
    try:
        idx = int(name)
    except ValueError:
        raise SampleValidationError(
            f"column {name!r} not found; header has {header}"
        ) from None
    if not 0 <= idx < len(header):
        raise SampleValidationError(f"column index {idx} out of range for header {header}")
    return idx


def read_sample_csv(
    path: str | Path,
    columns: Sequence[str] = ("0", "1"),
    delimiter: str = ",",
) -> tuple[np.ndarray, tuple[str, str]]:
    """Read two numeric columns from a headered CSV.

    ``columns`` are header names, or integer strings as positional fallbacks.
    Returns the (n, 2) array and the resolved column labels.

    Raises
    ------
    OSError
        Unreadable file.
    CsvParseError
        A selected cell is not numeric (``.line`` holds the file line).
    SampleValidationError
        Missing columns or not enough rows.
    """
    rows: list[tuple[float, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise SampleValidationError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        ix = _resolve_column(columns[0], header)
        iy = _resolve_column(columns[1], header)
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if max(ix, iy) >= len(row):
                raise CsvParseError(f"{path}: line {line_no} has too few fields", line_no)
            vals = []
            for i in (ix, iy):
                cell = row[i].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise CsvParseError(
                        f"{path}: line {line_no}: {cell!r} in column {header[i]!r} is not numeric",
                        line_no,
                    ) from None
                if not np.isfinite(v):
                    raise CsvParseError(
                        f"{path}: line {line_no}: non-finite value in column {header[i]!r}",
                        line_no,
                    )
                vals.append(v)
            rows.append((vals[0], vals[1]))
    if len(rows) < 2:
        raise SampleValidationError(f"{path}: need at least 2 data rows, found {len(rows)}")
    return np.asarray(rows, dtype=float), (header[ix], header[iy])


def write_sample_csv(path: str | Path, sample: np.ndarray, labels: Sequence[str] = ("X", "Y")) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(labels))
        writer.writerows(np.asarray(sample).tolist())


def export_density_csv(
    est: DensityEstimate, path: str | Path, names: Sequence[str] | None = None
) -> None:
    """Write the gridded density as CSV: one row per node, coordinates then value."""
    dims = est.grid.dims
    names = list(names) if names else [f"x{i+1}" for i in range(dims)]
    axes = est.axes
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["density"])
        if dims == 1:
            for xv, dv in zip(axes[0], est.values):
                writer.writerow([repr(float(xv)), repr(float(dv))])
        else:
            for i, xv in enumerate(axes[0]):
                for j, yv in enumerate(axes[1]):
                    writer.writerow([repr(float(xv)), repr(float(yv)), repr(float(est.values[i, j]))])


def write_json(obj: dict, path: str | Path | None) -> str:
    """Serialize to pretty JSON; write to path when given, always return the text."""
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def write_null_stats_csv(path: str | Path, null_stats: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replicate", "null_statistic"])
        for i, v in enumerate(np.asarray(null_stats)):
            writer.writerow([i, repr(float(v))])
