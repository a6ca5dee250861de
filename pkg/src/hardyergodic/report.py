"""Deterministic CSV/JSON output for experiment reports."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

__all__ = ["Report", "format_real", "to_csv", "to_json", "emit"]


@dataclass
class Report:
    """A table with a fixed header plus optional scalar metadata (JSON only)."""

    header: Sequence[str]
    rows: list[tuple] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)
    json_rows: bool = True


def format_real(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_real(float(v))
    return str(v)


def _plain(v):
    # numpy scalars and complex numbers into JSON-native values
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.header)
    for row in report.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def to_json(report: Report) -> str:
    payload = dict(report.meta)
    if report.rows and report.json_rows:
        payload["rows"] = [dict(zip(report.header, r)) for r in report.rows]
    return json.dumps(_plain(payload), sort_keys=True, indent=2, allow_nan=True) + "\n"


def emit(report: Report, fmt: str = "csv", destination: str | None = None) -> None:
    """Write ``report`` as CSV or JSON to a path, or stdout for ``None``/``-``."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = to_csv(report) if fmt == "csv" else to_json(report)
    if destination in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(destination, "w", newline="") as fh:
            fh.write(text)
