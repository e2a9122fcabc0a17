"""Deterministic table serialization (CSV with metadata header, JSON)."""

from __future__ import annotations

import csv
import io
import math


def format_value(value) -> str:
    """Render a cell: floats as 12-significant-digit 'g', rest verbatim."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if value == 0.0:
            return "0"
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def render_csv(columns: list[str], rows: list[tuple], metadata: dict) -> str:
    """Comma-separated table preceded by '# key=value' metadata lines.

    Output is byte-identical for identical inputs.
    """
    buf = io.StringIO()
    for key, value in metadata.items():
        buf.write(f"# {key}={format_value(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def render_json_payload(columns: list[str], rows: list[tuple], metadata: dict) -> dict:
    """JSON-serializable dict mirroring the CSV content."""
    def jsonable(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        return v
    return {
        "metadata": {k: jsonable(v) for k, v in metadata.items()},
        "columns": list(columns),
        "rows": [[jsonable(v) for v in row] for row in rows],
    }
