"""On-disk forms of simulation reports.

JSON is the canonical archive (exact float round-trip), CSV is a one-row-per-cell
export, and histogram tables are whitespace-separated columns for gnuplot or
similar tools.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import KsDistance, std_normal_pdf
from .errors import DomainError, SignTestError
from .harness import CellSummary, SimulationConfig, SimulationReport

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "family", "n", "p", "q", "H", "M", "mean", "variance", "skewness", "ks",
    "reject_rate_universal", "reject_rate_fixed",
)


class ReportIOError(SignTestError, OSError):
    def __init__(self, path, cause):
        self.path = str(path)
        self.cause = cause
        super().__init__(f"{self.path}: {cause}")


@dataclass(frozen=True)
class ReportFile:
    format: str
    path: Path
    schema_version: int = SCHEMA_VERSION


# -- dict conversion ---------------------------------------------------------

def cell_to_dict(cell: CellSummary) -> dict:
    d = {f.name: getattr(cell, f.name) for f in fields(cell)}
    d["ks_normal"] = {"d": cell.ks_normal.d, "sample_size": cell.ks_normal.sample_size}
    return d


def cell_from_dict(d: dict) -> CellSummary:
    known = {f.name for f in fields(CellSummary)}
    kw = {k: v for k, v in d.items() if k in known}
    ks = kw["ks_normal"]
    kw["ks_normal"] = KsDistance(d=ks["d"], sample_size=ks["sample_size"])
    return CellSummary(**kw)


def report_to_dict(report: SimulationReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": report.config.to_dict(),
        "cells": [cell_to_dict(c) for c in report.cells],
        "provenance": {
            "software": "signtests",
            "version": report.version,
            "wall_time": report.wall_time,
            "cell_seeds": report.cell_seeds,
        },
    }


def report_from_dict(d: dict) -> SimulationReport:
    prov = d.get("provenance", {})
    return SimulationReport(
        config=SimulationConfig.from_dict(d["config"]),
        cells=[cell_from_dict(c) for c in d.get("cells", [])],
        wall_time=prov.get("wall_time", 0.0),
        version=prov.get("version", __version__),
    )


def canonical_bytes(report: SimulationReport) -> bytes:
    """Serialization of the config-determined content, for reproducibility checks."""
    return json.dumps(report.canonical_dict(), sort_keys=True).encode()


# -- writers -----------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def csv_rows(report: SimulationReport) -> list:
    rows = []
    for c in report.cells:
        rows.append([
            c.family, c.n, c.p, c.q, c.H, c.M, c.mean, c.variance, c.skewness,
            c.ks_normal.d, c.rejection_rate_universal, c.rejection_rate_fixed,
        ])
    return rows


def render_csv(report: SimulationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in csv_rows(report):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(report: SimulationReport) -> str:
    return json.dumps(report_to_dict(report), indent=1) + "\n"


def _write_text(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(path, exc.strerror or exc) from exc


def write_report(report: SimulationReport, format: str, path) -> ReportFile:
    path = Path(path)
    if format == "json":
        _write_text(path, render_json(report))
    elif format == "csv":
        _write_text(path, render_csv(report))
    else:
        raise DomainError(f"unknown report format {format!r}; use json or csv")
    return ReportFile(format=format, path=path)


def read_report(path) -> SimulationReport:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ReportIOError(path, exc.strerror or exc) from exc
    except json.JSONDecodeError as exc:
        raise ReportIOError(path, f"not a JSON report ({exc})") from exc
    return report_from_dict(doc)


# -- plot data ---------------------------------------------------------------

def histogram_table(cell: CellSummary) -> np.ndarray:
    """Columns: bin center, empirical density, standard normal density."""
    counts = np.asarray(cell.hist_counts, dtype=float)
    edges = np.asarray(cell.hist_edges, dtype=float)
    if counts.size == 0 or edges.size != counts.size + 1 or counts.sum() <= 0:
        raise DomainError(f"cell (n={cell.n}, p={cell.p}) has no histogram")
    width = np.diff(edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = counts / (counts.sum() * width)
    return np.column_stack([centers, density, std_normal_pdf(centers)])


def emit_histogram_data(cell: CellSummary, path) -> ReportFile:
    table = histogram_table(cell)
    lines = [f"# family={cell.family} n={cell.n} p={cell.p} M={cell.M}",
             "# bin_center density normal_pdf"]
    lines += [" ".join(format(v, ".17g") for v in row) for row in table]
    path = Path(path)
    _write_text(path, "\n".join(lines) + "\n")
    return ReportFile(format="histogram", path=path)
