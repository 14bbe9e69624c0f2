"""Writing results as CSV tables or a single JSON document."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMATS = ("csv", "json")


@dataclass
class Report:
    """Named tables plus a summary record. ``summary["config"]`` holds the resolved config."""

    name: str
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def add_table(self, stem: str, header, rows):
        self.tables[stem] = (list(header), [list(r) for r in rows])


def format_number(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")
    return str(v)


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays unwrapped, non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])


def _dump_json(path: Path, doc):
    with open(path, "w") as fh:
        json.dump(_plain(doc), fh, indent=2, allow_nan=False)
        fh.write("\n")


def emit_report(report: Report, fmt: str, out_dir) -> list[Path]:
    """Write ``report`` under ``out_dir`` and return the paths written.

    ``csv``: one ``<stem>.csv`` per table plus ``<name>_summary.json``.
    ``json``: a single ``<name>.json`` with top-level ``config``, ``summary``
    and ``tables`` (each table a list of records).
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary = dict(report.summary)
        config = summary.pop("config", None)
        if fmt == "csv":
            written = []
            for stem, (header, rows) in report.tables.items():
                p = out / f"{stem}.csv"
                write_csv(p, header, rows)
                written.append(p)
            p = out / f"{report.name}_summary.json"
            _dump_json(p, {"command": report.name, "config": config, "summary": summary})
            written.append(p)
            return written
        tables = {
            stem: [dict(zip(header, row)) for row in rows] for stem, (header, rows) in report.tables.items()
        }
        p = out / f"{report.name}.json"
        _dump_json(p, {"command": report.name, "config": config, "summary": summary, "tables": tables})
        return [p]
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc.strerror or exc}") from exc


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
