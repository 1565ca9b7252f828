"""Report documents, their JSON schemas, and json/csv/md rendering.

JSON carries full float precision; csv and md are table views rounded to 3
decimal places with missing power columns shown as ``n/a``. The documents
for all formats are built from the same dict, so the numbers agree across
formats by construction.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone

from .protocol import SessionReport
from .traceio import StrainWindow

_NUM_OR_NULL = {"type": ["number", "null"]}
_INT_OR_NULL = {"type": ["integer", "null"]}

_PHASE_SCHEMA = {
    "type": "object",
    "properties": {
        "mean_w": _NUM_OR_NULL,
        "duration_s": {"type": "number"},
    },
    "required": ["mean_w", "duration_s"],
    "additionalProperties": False,
}

_PER_RUN_SCHEMA = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "properties": {
            "run": {"type": "integer", "minimum": 1},
            "running_dr_w": _NUM_OR_NULL,
            "alg_dr_w": _NUM_OR_NULL,
            "time_s": {"type": "number"},
            "energy_wh": _NUM_OR_NULL,
            "energy_paper_wmin": _NUM_OR_NULL,
            "carbon_g": _NUM_OR_NULL,
            "carbon_paper_g": _NUM_OR_NULL,
            "checksum": _INT_OR_NULL,
        },
        "required": ["run", "running_dr_w", "alg_dr_w", "time_s",
                     "energy_wh", "carbon_g", "checksum"],
        "additionalProperties": False,
    },
}

RUN_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "carbonprof run report",
    "type": "object",
    "properties": {
        "workload": {"type": "string"},
        "iters": _INT_OR_NULL,
        "runs": {"type": "integer", "minimum": 1},
        "phases": {
            "type": "object",
            "properties": {
                "pre": _PHASE_SCHEMA,
                "strain": _PHASE_SCHEMA,
                "post": _PHASE_SCHEMA,
            },
            "required": ["pre", "strain", "post"],
            "additionalProperties": False,
        },
        "init_dr_w": _NUM_OR_NULL,
        "running_dr_w": _NUM_OR_NULL,
        "alg_dr_w": _NUM_OR_NULL,
        "time_s": {"type": "number"},
        "energy_wh": _NUM_OR_NULL,
        "energy_paper_wmin": _NUM_OR_NULL,
        "carbon_g": _NUM_OR_NULL,
        "carbon_paper_g": _NUM_OR_NULL,
        "intensity_kg_per_kwh": {"type": "number", "exclusiveMinimum": 0},
        "checksum": _INT_OR_NULL,
        "per_run": _PER_RUN_SCHEMA,
        "charge_start_pct": _NUM_OR_NULL,
        "charge_end_pct": _NUM_OR_NULL,
        "timestamp": {"type": "string"},
    },
    "required": ["workload", "iters", "runs", "phases", "init_dr_w",
                 "running_dr_w", "alg_dr_w", "time_s", "energy_wh",
                 "carbon_g", "intensity_kg_per_kwh", "checksum", "per_run",
                 "charge_start_pct", "charge_end_pct", "timestamp"],
    "additionalProperties": False,
}

BENCH_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "carbonprof bench report",
    "type": "object",
    "properties": {
        "iters": _INT_OR_NULL,
        "runs": {"type": "integer", "minimum": 1},
        "intensity_kg_per_kwh": {"type": "number", "exclusiveMinimum": 0},
        "rows": {
            "type": "array",
            "minItems": 4,
            "maxItems": 4,
            "items": {"type": "object"},
        },
        "max_carbon_workload": {"type": ["string", "null"]},
        "min_carbon_workload": {"type": ["string", "null"]},
        "timestamp": {"type": "string"},
    },
    "required": ["iters", "runs", "intensity_kg_per_kwh", "rows",
                 "max_carbon_workload", "min_carbon_workload", "timestamp"],
    "additionalProperties": False,
}

ANALYZE_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "carbonprof analyze report",
    "type": "object",
    "properties": {
        "trace": {"type": "string"},
        "samples": {"type": "integer", "minimum": 1},
        "baseline": {
            "type": "object",
            "properties": {
                "t0_s": {"type": "number"},
                "t1_s": {"type": "number"},
                "mean_w": {"type": "number"},
                "std_w": {"type": "number"},
            },
            "required": ["t0_s", "t1_s", "mean_w", "std_w"],
            "additionalProperties": False,
        },
        "k": {"type": "number", "exclusiveMinimum": 0},
        "threshold_w": {"type": "number"},
        "window": {
            "type": ["object", "null"],
            "properties": {
                "t_start_s": {"type": "number"},
                "t_end_s": {"type": "number"},
                "duration_s": {"type": "number"},
                "mean_w": {"type": "number"},
            },
            "required": ["t_start_s", "t_end_s", "duration_s", "mean_w"],
            "additionalProperties": False,
        },
        "window_energy_wh": _NUM_OR_NULL,
        "strain_energy_wh": _NUM_OR_NULL,
        "strain_energy_j": _NUM_OR_NULL,
        "carbon_g": _NUM_OR_NULL,
        "intensity_kg_per_kwh": {"type": "number", "exclusiveMinimum": 0},
        "timestamp": {"type": "string"},
    },
    "required": ["trace", "samples", "baseline", "k", "threshold_w", "window",
                 "window_energy_wh", "strain_energy_wh", "strain_energy_j",
                 "carbon_g", "intensity_kg_per_kwh", "timestamp"],
    "additionalProperties": False,
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _phase_dict(stats) -> dict:
    return {"mean_w": stats.mean_w, "duration_s": stats.duration_s}


def report_to_dict(report: SessionReport, paper_units: bool = False,
                   timestamp: str | None = None) -> dict:
    """Shape a SessionReport into the documented JSON layout. The
    paper-convention energy/carbon keys appear only when requested."""
    doc = {
        "workload": report.workload,
        "iters": report.iters,
        "runs": report.runs,
        "phases": {name: _phase_dict(st) for name, st in report.phases.items()},
        "init_dr_w": report.init_dr_w,
        "running_dr_w": report.running_dr_w,
        "alg_dr_w": report.alg_dr_w,
        "time_s": report.time_s,
        "energy_wh": report.energy_wh,
    }
    if paper_units:
        doc["energy_paper_wmin"] = report.energy_paper_wmin
    doc["carbon_g"] = report.carbon_g
    if paper_units:
        doc["carbon_paper_g"] = report.carbon_paper_g
    doc["intensity_kg_per_kwh"] = report.intensity.factor
    doc["checksum"] = report.checksum

    per_run = []
    for row in report.per_run:
        entry = {
            "run": row.run,
            "running_dr_w": row.running_dr_w,
            "alg_dr_w": row.alg_dr_w,
            "time_s": row.time_s,
            "energy_wh": row.energy_wh,
        }
        if paper_units:
            entry["energy_paper_wmin"] = row.energy_paper_wmin
        entry["carbon_g"] = row.carbon_g
        if paper_units:
            entry["carbon_paper_g"] = row.carbon_paper_g
        entry["checksum"] = row.checksum
        per_run.append(entry)
    doc["per_run"] = per_run
    doc["charge_start_pct"] = report.charge_start
    doc["charge_end_pct"] = report.charge_end
    doc["timestamp"] = timestamp if timestamp is not None else _now()
    return doc


def bench_to_dict(reports: list[SessionReport], paper_units: bool = False,
                  timestamp: str | None = None) -> dict:
    ts = timestamp if timestamp is not None else _now()
    rows = [report_to_dict(r, paper_units, timestamp=ts) for r in reports]
    for row in rows:
        del row["timestamp"]
    carbons = [(r.workload, r.carbon_g) for r in reports if r.carbon_g is not None]
    max_w = max(carbons, key=lambda p: p[1])[0] if carbons else None
    min_w = min(carbons, key=lambda p: p[1])[0] if carbons else None
    return {
        "iters": reports[0].iters,
        "runs": reports[0].runs,
        "intensity_kg_per_kwh": reports[0].intensity.factor,
        "rows": rows,
        "max_carbon_workload": max_w,
        "min_carbon_workload": min_w,
        "timestamp": ts,
    }


def analyze_to_dict(trace_label: str, n_samples: int, baseline_t0: float,
                    baseline_t1: float, baseline_mean: float, baseline_std: float,
                    k: float, window: StrainWindow | None,
                    window_energy_wh: float | None, strain_energy_wh: float | None,
                    carbon_g: float | None, intensity_factor: float,
                    timestamp: str | None = None) -> dict:
    win = None
    if window is not None:
        win = {
            "t_start_s": window.t_start,
            "t_end_s": window.t_end,
            "duration_s": window.duration,
            "mean_w": window.mean_power,
        }
    return {
        "trace": trace_label,
        "samples": n_samples,
        "baseline": {
            "t0_s": baseline_t0,
            "t1_s": baseline_t1,
            "mean_w": baseline_mean,
            "std_w": baseline_std,
        },
        "k": k,
        "threshold_w": baseline_mean + k * baseline_std,
        "window": win,
        "window_energy_wh": window_energy_wh,
        "strain_energy_wh": strain_energy_wh,
        "strain_energy_j": strain_energy_wh * 3600.0 if strain_energy_wh is not None else None,
        "carbon_g": carbon_g,
        "intensity_kg_per_kwh": intensity_factor,
        "timestamp": timestamp if timestamp is not None else _now(),
    }


def _fmt_cell(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _flatten(doc: dict, skip=("per_run", "rows", "timestamp"), prefix="") -> list[tuple[str, object]]:
    items = []
    for key, value in doc.items():
        if key in skip:
            continue
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten(value, skip=(), prefix=f"{name}."))
        else:
            items.append((name, value))
    return items


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def doc_to_csv(doc: dict) -> str:
    """Flat two-line csv of the scalar fields (per_run and timestamp are
    json-only)."""
    items = _flatten(doc)
    header = ",".join(key for key, _ in items)
    row = ",".join(_fmt_cell(v) for _, v in items)
    return header + "\n" + row + "\n"


def doc_to_md(doc: dict) -> str:
    items = _flatten(doc)
    width = max(len(k) for k, _ in items)
    lines = [f"| {'field'.ljust(width)} | value |",
             f"| {'-' * width} | ----- |"]
    for key, value in items:
        lines.append(f"| {key.ljust(width)} | {_fmt_cell(value)} |")
    return "\n".join(lines) + "\n"


_BENCH_COLUMNS = ("workload", "init_dr_w", "running_dr_w", "alg_dr_w",
                  "time_s", "energy_wh", "carbon_g")
_BENCH_PAPER_COLUMNS = ("energy_paper_wmin", "carbon_paper_g")


def _bench_table(doc: dict) -> tuple[list[str], list[list[str]]]:
    paper = any("energy_paper_wmin" in row for row in doc["rows"])
    columns = list(_BENCH_COLUMNS) + (list(_BENCH_PAPER_COLUMNS) if paper else [])
    columns.append("flag")
    body = []
    for row in doc["rows"]:
        flags = []
        if row["workload"] == doc["max_carbon_workload"]:
            flags.append("max")
        if row["workload"] == doc["min_carbon_workload"]:
            flags.append("min")
        cells = [_fmt_cell(row.get(c)) for c in columns[:-1]]
        cells.append("+".join(flags))
        body.append(cells)
    return columns, body


def bench_to_csv(doc: dict) -> str:
    columns, body = _bench_table(doc)
    lines = [",".join(columns)]
    lines.extend(",".join(cells) for cells in body)
    return "\n".join(lines) + "\n"


def bench_to_md(doc: dict) -> str:
    columns, body = _bench_table(doc)
    widths = [max(len(c), max((len(r[i]) for r in body), default=0))
              for i, c in enumerate(columns)]
    def fmt_row(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    lines = [fmt_row(columns),
             "| " + " | ".join("-" * w for w in widths) + " |"]
    lines.extend(fmt_row(cells) for cells in body)
    return "\n".join(lines) + "\n"


def render(doc: dict, fmt: str, kind: str = "run") -> str:
    """Render a report document as json, csv or md."""
    if fmt == "json":
        return to_json(doc)
    if fmt == "csv":
        return bench_to_csv(doc) if kind == "bench" else doc_to_csv(doc)
    if fmt == "md":
        return bench_to_md(doc) if kind == "bench" else doc_to_md(doc)
    raise ValueError(f"unknown format {fmt!r}")
