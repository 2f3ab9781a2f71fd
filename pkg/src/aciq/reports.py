"""Delimited report writers: RFC-4180 CSV (LF line endings, '.' decimals)
and single-document JSON."""

from __future__ import annotations

import csv
import json


def format_value(value) -> str:
    """Shortest round-trip text for floats; plain str for everything else."""
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path, fieldnames, rows) -> None:
    """Write dict rows under a header; missing keys become empty fields."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([format_value(row.get(name)) for name in fieldnames])


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=False)
        f.write("\n")


def write_report(path, fmt: str, fieldnames, rows, payload=None) -> None:
    """Dispatch on ``fmt``: rows as CSV, or the full payload as JSON."""
    if fmt == "csv":
        write_csv(path, fieldnames, rows)
    elif fmt == "json":
        write_json(path, payload if payload is not None else {"rows": list(rows)})
    else:
        raise ValueError(f"unknown format: {fmt!r}")
