"""Dataset ingestion, the publication-bias selection adjustment, and
CSV/JSON table output.

Input files are UTF-8, comma-delimited, with a header row that defines the
columns.  Output tables have a deterministic column order (first-seen order
across rows) and floats printed with 6 significant digits.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .core import PValueSample, ValidationError

ID_COLUMN_CANDIDATES = ("id", "label", "name", "study")

SELECTION_CUTOFF = 0.025
SELECTION_FACTOR = 40.0


@dataclass(frozen=True)
class DatasetDescriptor:
    """Where a p-value dataset lives and how to read it.

    ``direction_column`` names an effect-direction column (positive means
    the effect points in the tested direction); it is required to convert
    two-sided p-values to one-sided ones.
    """

    path: str | Path
    column: str
    sidedness: Literal["one_sided", "two_sided"] = "one_sided"
    selection_adjust: bool = False
    direction_column: str | None = None


def _parse_direction(raw: str) -> bool:
    token = raw.strip().lower()
    if token in ("+", "pos", "positive", "up"):
        return True
    if token in ("-", "neg", "negative", "down"):
        return False
    try:
        return float(token) > 0.0
    except ValueError:
        raise ValidationError(f"cannot interpret effect direction {raw!r}")


def load_pvalues(desc: DatasetDescriptor) -> PValueSample:
    """Read a p-value column from a delimited text file.

    Rows whose p-value cell is missing or non-numeric are rejected and
    reported (by 1-based data row number) in the sample's provenance
    metadata; a value outside [0, 1] is an error.  Labels are taken from
    the first column named like an identifier, when one exists.
    """
    path = Path(desc.path)
    if not path.exists():
        raise ValidationError(f"dataset file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path}: file is empty (no header row)")
        if desc.column not in reader.fieldnames:
            raise ValidationError(
                f"{path}: column {desc.column!r} not in header {reader.fieldnames}"
            )
        if desc.direction_column and desc.direction_column not in reader.fieldnames:
            raise ValidationError(
                f"{path}: direction column {desc.direction_column!r} not in header"
            )
        id_column = next(
            (c for c in reader.fieldnames if c.lower() in ID_COLUMN_CANDIDATES), None
        )
        values: list[float] = []
        labels: list[str] = []
        skipped: list[int] = []
        for row_number, row in enumerate(reader, start=1):
            raw = (row.get(desc.column) or "").strip()
            try:
                value = float(raw)
            except ValueError:
                skipped.append(row_number)
                continue
            if not 0.0 <= value <= 1.0:
                raise ValidationError(
                    f"{path}: p-value {value} in data row {row_number} is outside [0, 1]"
                )
            if desc.sidedness == "two_sided" and desc.direction_column:
                positive = _parse_direction(row.get(desc.direction_column) or "")
                value = value / 2.0 if positive else 1.0 - value / 2.0
            values.append(value)
            labels.append(row[id_column] if id_column else str(row_number))
    if not values:
        raise ValidationError(f"{path}: no parsable p-values found")
    sidedness = desc.sidedness
    if desc.sidedness == "two_sided" and desc.direction_column:
        sidedness = "one_sided"  # converted on load
    meta = {
        "path": str(path),
        "column": desc.column,
        "sidedness": sidedness,
        "skipped_rows": tuple(skipped),
    }
    return PValueSample(values=np.array(values), labels=tuple(labels), meta=meta)


def selection_adjust(sample: PValueSample, inclusive: bool = False) -> PValueSample:
    """Publication-bias adjustment: keep one-sided p-values below 0.025 and
    rescale them by 40 (so a uniform null stays uniform after truncation).

    The cutoff comparison is strict by default; ``inclusive`` switches it to
    <= for sensitivity analysis.
    """
    meta = dict(sample.meta or {})
    if meta.get("sidedness") == "two_sided":
        raise ValidationError(
            "selection adjustment needs one-sided p-values; convert first"
        )
    if inclusive:
        keep = sample.values <= SELECTION_CUTOFF
    else:
        keep = sample.values < SELECTION_CUTOFF
    values = sample.values[keep] * SELECTION_FACTOR
    meta.update(
        {
            "selection_adjusted": True,
            "selection_rule": "<=" if inclusive else "<",
            "selection_cutoff": SELECTION_CUTOFF,
            "selection_factor": SELECTION_FACTOR,
            "selection_kept": int(keep.sum()),
            "selection_dropped": int((~keep).sum()),
        }
    )
    return PValueSample(
        values=values,
        truth=sample.truth[keep] if sample.truth is not None else None,
        labels=(
            tuple(lbl for lbl, k in zip(sample.labels, keep) if k)
            if sample.labels is not None
            else None
        ),
        meta=meta,
    )


def percent_of_total(r: int, m: int) -> int:
    """Rejection percentage as printed in summary tables: round(100 r / m)."""
    return round(100.0 * r / m)


# ---------------------------------------------------------------------------
# table serialization
# ---------------------------------------------------------------------------

def _format_value(x):
    if x is None or isinstance(x, (str, bool)):
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    value = float(x)
    if not np.isfinite(value):
        return value
    return float(f"{value:.6g}")


def format_rows(rows: list[dict]) -> list[dict]:
    """Apply the output float format (6 significant digits) to every cell."""
    return [{k: _format_value(v) for k, v in row.items()} for row in rows]


def _columns(rows: list[dict]) -> list[str]:
    cols: list[str] = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def write_table(rows: list[dict], path: str | Path, fmt: Literal["csv", "json"] = "csv") -> None:
    """Write rows to CSV or JSON with the documented formatting rules.

    JSON output is keyed by procedure name when a ``procedure`` column is
    present; both formats read back (via :func:`read_table`) to the same
    formatted rows.
    """
    path = Path(path)
    formatted = format_rows(rows)
    cols = _columns(formatted)
    try:
        if fmt == "csv":
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(cols)
                for row in formatted:
                    writer.writerow(["" if row.get(c) is None else row.get(c) for c in cols])
        elif fmt == "json":
            if "procedure" in cols:
                grouped: dict[str, list[dict]] = {}
                for row in formatted:
                    grouped.setdefault(str(row["procedure"]), []).append(
                        {k: v for k, v in row.items() if k != "procedure"}
                    )
                payload = {"columns": cols, "procedures": grouped}
            else:
                payload = {"columns": cols, "rows": formatted}
            path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        else:
            raise ValidationError(f"unknown table format {fmt!r}")
    except OSError as exc:
        raise ValidationError(f"cannot write table to {path}: {exc}") from exc


def _parse_cell(raw: str):
    if raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    if raw == "True":
        return True
    if raw == "False":
        return False
    return raw


def read_table(path: str | Path) -> list[dict]:
    """Read back a table written by :func:`write_table` (format inferred)."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"table file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        payload = json.loads(text)
        if "procedures" in payload:
            rows = []
            for name, group in payload["procedures"].items():
                for row in group:
                    rows.append({"procedure": name, **row})
            # restore the written column order
            cols = payload["columns"]
            return [{c: row.get(c) for c in cols if c in row} for row in rows]
        return payload["rows"]
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header is None:
        raise ValidationError(f"{path}: empty table")
    return [{c: _parse_cell(cell) for c, cell in zip(header, row)} for row in reader]
