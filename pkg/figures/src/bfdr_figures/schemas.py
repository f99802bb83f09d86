"""Figure kinds and the CSV columns each one expects.

This package is strictly read-only over the experiment CSVs: every number
drawn comes from the input file (plus the documented reference lines).
"""
from __future__ import annotations

import csv
from pathlib import Path


class SchemaMismatchError(ValueError):
    """Input CSV does not carry the columns the figure kind needs."""


class EmptyInputError(ValueError):
    """Input CSV has a header but no data rows (or no header at all)."""


REQUIRED_COLUMNS: dict[str, tuple[str, ...]] = {
    "curve": ("procedure", "q", "bfdr_hat", "se"),
    "boxplot": ("procedure", "rho", "q", "bfdr_hat", "se",
                "pi0_q25", "pi0_median", "pi0_q75"),
    "heatmap": ("procedure", "pi0", "m", "relative_power"),
    "calibration": ("t", "alpha", "alpha_pi0"),
}

KINDS = tuple(REQUIRED_COLUMNS)


def _parse_cell(raw: str):
    if raw == "":
        return None
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def load_rows(path: str | Path, kind: str) -> list[dict]:
    """Read a CSV and check it against the kind's expected columns."""
    if kind not in REQUIRED_COLUMNS:
        raise SchemaMismatchError(f"unknown figure kind {kind!r}; expected one of {KINDS}")
    path = Path(path)
    if not path.exists():
        raise EmptyInputError(f"input CSV not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise EmptyInputError(f"{path}: no header row")
        missing = [c for c in REQUIRED_COLUMNS[kind] if c not in header]
        if missing:
            raise SchemaMismatchError(
                f"{path}: missing columns for kind {kind!r}: {', '.join(missing)}"
            )
        rows = [{k: _parse_cell(v if v is not None else "") for k, v in row.items()}
                for row in reader]
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    return rows
